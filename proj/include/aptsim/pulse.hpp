#pragma once

// Pulse sequences: ideal rotations and dissipative holds.
//
// Conventions
//   * List order is temporal order. The sequence propagator is the product
//     U = U_n ... U_2 U_1, so the first segment acts first on the state.
//   * ROTATION(a, theta) = exp(-i theta I_a). A pulse "along -y by pi/2" is
//     ROTATION(y, -pi/2); "along +y" is ROTATION(y, +pi/2).
//   * Rotations are instantaneous.
//
//     segment              propagator
//     ROTATION(a, theta)   exp(-i theta I_a)
//     HOLD_HM(J, G, tau)   exp(-i H_M tau)
//     HOLD_DISS(G, tau)    diag(1, exp(-2 G tau))
//     HOLD_RABI(J, tau)    exp(-i 2J I_x tau)

#include <cmath>
#include <numbers>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "aptsim/errors.hpp"
#include "aptsim/linalg.hpp"
#include "aptsim/model.hpp"

namespace aptsim {

enum class Axis { kX, kY, kZ };

inline const char* to_string(Axis a) {
  switch (a) {
    case Axis::kX: return "x";
    case Axis::kY: return "y";
    case Axis::kZ: return "z";
  }
  return "?";
}

inline ComplexMat2 spin_operator(Axis a) {
  switch (a) {
    case Axis::kX: return ComplexMat2::spin_x();
    case Axis::kY: return ComplexMat2::spin_y();
    case Axis::kZ: return ComplexMat2::spin_z();
  }
  return {};
}

struct Rotation {
  Axis axis{Axis::kX};
  double angle{0.0};  // rad
  friend bool operator==(const Rotation&, const Rotation&) = default;
};

struct HoldHm {
  SystemParams params{};
  double duration{0.0};  // us
  friend bool operator==(const HoldHm&, const HoldHm&) = default;
};

struct HoldDissipation {
  double gamma{0.0};
  double duration{0.0};
  friend bool operator==(const HoldDissipation&, const HoldDissipation&) = default;
};

struct HoldRabi {
  double j{0.0};
  double duration{0.0};
  friend bool operator==(const HoldRabi&, const HoldRabi&) = default;
};

using PulseSegment = std::variant<Rotation, HoldHm, HoldDissipation, HoldRabi>;

inline void validate(const PulseSegment& seg) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rotation>) {
          if (!std::isfinite(s.angle)) throw InvalidParams("rotation angle must be finite");
        } else {
          if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) {
            throw InvalidParams("hold duration must be finite and non-negative");
          }
        }
      },
      seg);
}

inline ComplexMat2 segment_propagator(const PulseSegment& seg) {
  return std::visit(
      [](const auto& s) -> ComplexMat2 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rotation>) {
          return expm_closed(spin_operator(s.axis) * cplx{0.0, -s.angle});
        } else if constexpr (std::is_same_v<T, HoldHm>) {
          return expm_closed(h_m(s.params) * cplx{0.0, -s.duration});
        } else if constexpr (std::is_same_v<T, HoldDissipation>) {
          return ComplexMat2::diag(1.0, std::exp(-2.0 * s.gamma * s.duration));
        } else {
          return expm_closed(ComplexMat2::spin_x() * cplx{0.0, -2.0 * s.j * s.duration});
        }
      },
      seg);
}

class PulseSequence {
 public:
  PulseSequence() = default;
  explicit PulseSequence(std::vector<PulseSegment> segments) : segments_(std::move(segments)) {
    for (const auto& s : segments_) validate(s);
  }

  const std::vector<PulseSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  std::size_t size() const { return segments_.size(); }

  PulseSequence then(const PulseSequence& later) const {
    std::vector<PulseSegment> all = segments_;
    all.insert(all.end(), later.segments_.begin(), later.segments_.end());
    return PulseSequence(std::move(all));
  }

  PulseSequence then(const PulseSegment& seg) const {
    std::vector<PulseSegment> all = segments_;
    all.push_back(seg);
    return PulseSequence(std::move(all));
  }

  ComplexMat2 propagator() const {
    ComplexMat2 u = ComplexMat2::identity();
    for (const auto& s : segments_) u = segment_propagator(s) * u;
    return u;
  }

  friend bool operator==(const PulseSequence&, const PulseSequence&) = default;

 private:
  std::vector<PulseSegment> segments_;
};

/// Ry(-pi/2), H_M hold for tau, Ry(+pi/2). Its propagator equals
/// exp(-i H_APT tau).
inline PulseSequence compile_apt_evolution(const SystemParams& params, double tau) {
  if (!(tau >= 0.0)) throw InvalidParams("evolution time must be non-negative");
  constexpr double half_pi = std::numbers::pi / 2.0;
  return PulseSequence({Rotation{Axis::kY, -half_pi}, HoldHm{params, tau},
                        Rotation{Axis::kY, half_pi}});
}

inline QubitState evolve(const PulseSequence& seq, const QubitState& psi0) {
  QubitState psi = psi0;
  for (const auto& s : seq.segments()) psi = segment_propagator(s) * psi;
  return psi;
}

}  // namespace aptsim
