mod common;

use common::{affine_price, linspace, market};
use gbs::{fd_solve, FdGrid, OptionKind, OptionSpec, QuadratureSpec, SpectralSolution};

#[test]
fn reference_grid_matches_the_affine_closed_form() {
    let grid = FdGrid::reference(3.0).unwrap();
    for kind in [OptionKind::Call, OptionKind::Put] {
        let spec = OptionSpec::new(3.0, 5.0, kind).unwrap();
        for a in [-0.03, -0.01] {
            let curve = fd_solve(&market(a), &spec, &grid, 3.0).unwrap();
            for s in linspace(0.5, 7.0, 66) {
                let d = curve.interpolate(s).unwrap() - affine_price(&market(a), &spec, s, 3.0);
                assert!(d.abs() < 1e-4, "{kind} a={a} S={s}: {d}");
            }
        }
    }
}

#[test]
fn agrees_with_the_converged_series() {
    let spec = OptionSpec::call(3.0, 5.0).unwrap();
    let grid = FdGrid::reference(3.0).unwrap();
    for t in [3.0, 4.0] {
        let fd = fd_solve(&market(-0.02), &spec, &grid, t).unwrap();
        let sol = SpectralSolution::compute(&market(-0.02), &spec, 1024, &QuadratureSpec::default())
            .unwrap();
        for s in linspace(0.5, 7.0, 131) {
            let d = fd.interpolate(s).unwrap() - sol.price(s, t).unwrap();
            assert!(d.abs() < 1e-4 * 3.0, "t={t} S={s}: {d}");
        }
    }
}
