#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gaugep {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline const cplx I{0.0, 1.0};
// e^{i pi/4}
inline const cplx SQRT_I{0.70710678118654752440, 0.70710678118654752440};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RunFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GuardRefusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateEstimate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gaugep
