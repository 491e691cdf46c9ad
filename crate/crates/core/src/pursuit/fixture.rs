use crate::linalg::{Matrix, Vector};

/// Three unit atoms in R³ and a signal on which OMP, OLS and COLS pick three
/// different 2-atom supports.
///
/// - `a1 = (1, 0, 0)` lies on the first axis;
/// - `a2 = (0.6, 0.8, 0)` lies in the plane of axes 1 and 2;
/// - `a3 = (0.8, 0, 0.6)` lies in the plane of axes 1 and 3;
/// - `x = (2, 0.5, 0.6)`.
///
/// `a1` is the atom most correlated with `x` (2.0 against 1.6 and 1.96).
/// After projecting it out the residual is `(0, 0.5, 0.6)`, which `a2`
/// correlates with more strongly (0.4 against 0.36), so OMP ends on
/// `{a1, a2}` with residual 0.6. OLS instead compares the two-atom
/// residuals 0.6 for `{a1, a2}` and 0.5 for `{a1, a3}` and keeps `{a1, a3}`.
/// The plane of `{a2, a3}` leaves only ≈ 0.4514, which COLS finds by
/// restarting from `a2`.
pub fn fig1_fixture() -> (Matrix, Vector) {
    let dict = Matrix::from_columns(&[[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [0.8, 0.0, 0.6]])
        .expect("fixture dictionary is well formed");
    let signal = Vector::new(vec![2.0, 0.5, 0.6]).expect("fixture signal is finite");
    (dict, signal)
}
