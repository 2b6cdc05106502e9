#include "modalnet/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modalnet/controllability.hpp"
#include "modalnet/model.hpp"
#include "modalnet/modes.hpp"
#include "random.hpp"

namespace modalnet {

namespace {

void check_shapes(const RMatrix& A, const RMatrix& B, const RMatrix& C_hat) {
  if (A.rows() < 1 || A.rows() != A.cols() || B.rows() != A.rows() || B.cols() < 1 || C_hat.cols() != A.rows() ||
      C_hat.rows() < 1) {
    throw DimensionError("protocol design needs A n x n, B n x m and C_hat q x n");
  }
}

}  // namespace

ProtocolCertificate certify_protocol(const RMatrix& A, const RMatrix& B, const RMatrix& C_hat, const RMatrix& H,
                                     const Tolerances& tol) {
  check_shapes(A, B, C_hat);
  if (H.rows() != B.cols() || H.cols() != C_hat.rows()) {
    throw DimensionError("H must be m x q");
  }
  ProtocolCertificate cert;
  cert.spectrum_open = eigenvalues(A.cast<Complex>());
  cert.spectrum_closed = eigenvalues((A + B * H * C_hat).cast<Complex>());

  cert.min_separation = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cert.spectrum_open.size(); ++i) {
    for (Eigen::Index j = 0; j < cert.spectrum_closed.size(); ++j) {
      cert.min_separation = std::min(cert.min_separation, std::abs(cert.spectrum_open(i) - cert.spectrum_closed(j)));
    }
  }
  const double radius = std::max(cert.spectrum_open.cwiseAbs().maxCoeff(), cert.spectrum_closed.cwiseAbs().maxCoeff());
  cert.required_separation = tol.cluster_radius(radius);

  const SubsystemModel designed{A, B, H * C_hat};
  cert.invariant_modes_after = detect_invariant_modes(designed, tol);
  return cert;
}

ProtocolDesign design_protocol(const RMatrix& A, const RMatrix& B, const RMatrix& C_hat, const Tolerances& tol,
                               std::uint64_t rng_seed, int max_tries) {
  check_shapes(A, B, C_hat);
  if (max_tries < 1) throw InvalidArgument("max_tries must be positive");
  const CMatrix a = A.cast<Complex>();
  if (!pbh_controllable(a, B.cast<Complex>(), tol).controllable) {
    throw PreconditionFailed("protocol design requires a controllable pair (A, B)");
  }
  if (!pbh_observable(C_hat.cast<Complex>(), a, tol).controllable) {
    throw PreconditionFailed("protocol design requires an observable pair (C_hat, A)");
  }

  const double gain_scale = 1.0 / (spectral_norm(B.cast<Complex>()) * spectral_norm(C_hat.cast<Complex>()));
  std::uniform_real_distribution<double> entry(-1.0, 1.0);

  ProtocolDesign best;
  best.certificate.min_separation = -1.0;
  for (int k = 0; k < max_tries; ++k) {
    auto engine = detail::make_engine(rng_seed, detail::Stream::kProtocolSearch, static_cast<std::uint64_t>(k));
    RMatrix h(B.cols(), C_hat.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      for (Eigen::Index j = 0; j < h.cols(); ++j) h(i, j) = gain_scale * entry(engine);
    }
    ProtocolDesign attempt{C_hat, h, certify_protocol(A, B, C_hat, h, tol), k + 1};
    if (attempt.certificate.passed()) return attempt;
    if (attempt.certificate.min_separation > best.certificate.min_separation) best = std::move(attempt);
  }
  throw DesignExhausted("no accepted protocol after " + std::to_string(max_tries) + " tries", std::move(best));
}

}  // namespace modalnet
