//! Numerical kernels shared by every solver: the standard normal CDF and
//! quantile, and small dense linear algebra (symmetric eigendecomposition,
//! PSD square roots, linear solves).

pub mod linalg;
pub mod normal;

pub use linalg::{
    dot, jacobi_eigen, linear_solve, norm2, norm_inf, psd_sqrt, rank, Eigen, Matrix, SymMatrix,
};
pub use normal::{erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};
