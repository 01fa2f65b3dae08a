#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace pertlab {

using Scalar = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

struct Tolerances {
    double structural = 1e-9;   // algebra closure, idempotency, bimodularity
    double singular = 1e-10;    // invertibility cutoffs
};

// Error taxonomy shared across modules.

struct SingularInput : std::runtime_error {
    explicit SingularInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct EigenvalueAtThreshold : std::runtime_error {
    explicit EigenvalueAtThreshold(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotUnitary : std::runtime_error {
    explicit NotUnitary(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotNested : std::runtime_error {
    explicit NotNested(const std::string& msg) : std::runtime_error(msg) {}
};

struct GramDegenerate : std::runtime_error {
    explicit GramDegenerate(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotInRange : std::runtime_error {
    explicit NotInRange(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct ApproximantTooFar : std::runtime_error {
    explicit ApproximantTooFar(const std::string& msg) : std::runtime_error(msg) {}
};

struct SpectralGapFail : std::runtime_error {
    explicit SpectralGapFail(const std::string& msg) : std::runtime_error(msg) {}
};

struct IndexNotInvertible : std::runtime_error {
    explicit IndexNotInvertible(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pertlab
