#pragma once

#include "cdsnet/types.hpp"

namespace cdsnet {

/// Parameters shared by the gate gadgets and the circuit compiler.
///
/// The decoding thresholds gamma and delta, the tolerance eps the compiled
/// network is hardened against, the CDS notionals of the NAND gadget, and
/// the purify chain constants phi and eta. With the defaults,
/// eps = gamma (1 - gamma) / (3 - gamma) and delta = eps, which is the
/// largest tolerance the NAND gadget admits.
struct ReductionConstants {
  Scalar gamma;
  Scalar eps;
  Scalar delta;
  Scalar phi;

  Scalar c1() const { return 1.0 / (1.0 - gamma); }
  Scalar c2() const { return c1(); }
  Scalar eta() const { return (1.0 - phi) / (1.0 - gamma) + eps; }

  static ReductionConstants defaults();
};

}  // namespace cdsnet
