#pragma once

#include <cstdint>
#include <vector>

#include "modalnet/errors.hpp"
#include "modalnet/linalg.hpp"

namespace modalnet {

struct ProtocolCertificate {
  CVector spectrum_open;    // eig(A)
  CVector spectrum_closed;  // eig(A + B H C_hat)
  double min_separation = 0.0;
  /// eig_cluster_tol * max(1, spectral radii of both spectra).
  double required_separation = 0.0;
  std::vector<Complex> invariant_modes_after;

  bool passed() const { return min_separation > required_separation && invariant_modes_after.empty(); }
};

struct ProtocolDesign {
  RMatrix C_hat;
  RMatrix H;
  ProtocolCertificate certificate;
  /// 1-based index of the accepted draw.
  int tries = 0;
};

class DesignExhausted : public Error {
 public:
  DesignExhausted(const std::string& what, ProtocolDesign best) : Error(what), best_(std::move(best)) {}
  /// Attempt with the largest spectral separation.
  const ProtocolDesign& best() const { return best_; }

 private:
  ProtocolDesign best_;
};

/// Recomputes both acceptance checks for a given H: spectra of A and
/// A + B H C_hat are disjoint beyond tolerance, and the subsystem
/// (H C_hat, A, B) has no network-invariant modes.
ProtocolCertificate certify_protocol(const RMatrix& A, const RMatrix& B, const RMatrix& C_hat, const RMatrix& H,
                                     const Tolerances& tol);

/// Seeded random search for H with C = H C_hat free of network-invariant modes.
/// Draw k uses its own derived stream; the lowest accepted draw wins.
/// Throws PreconditionFailed unless (A, B) is controllable and (C_hat, A)
/// observable, and DesignExhausted after max_tries rejected draws.
ProtocolDesign design_protocol(const RMatrix& A, const RMatrix& B, const RMatrix& C_hat, const Tolerances& tol,
                               std::uint64_t rng_seed, int max_tries = 64);

}  // namespace modalnet
