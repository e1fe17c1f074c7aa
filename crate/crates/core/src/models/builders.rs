//! Assembly of model matrices from data and hyperparameters.

use nalgebra::DMatrix;

use super::covariance::{cross_covariance, paired_covariance_sym, total_covariance};
use super::gep::GepProblem;
use super::graphs::{heat_knn_laplacian, lda_graphs, lfda_graphs, mfa_graphs, scatter_matrices};
use super::{GraphKind, ModelFamily, ModelSpec, TwoViewData, ViewId};
use crate::error::{Error, Result};
use crate::matkernels::SymMatrix;
use crate::saa::JointProblem;

/// Per-view quadratic ingredients shared by the builders.
struct ViewTerms {
    paired_cov: SymMatrix,
    total_cov: Option<SymMatrix>,
    laplacian_reg: Option<SymMatrix>,
    scatter_w: Option<SymMatrix>,
    scatter_b: Option<SymMatrix>,
}

fn view_terms(data: &TwoViewData, s: ViewId, spec: &ModelSpec) -> Result<ViewTerms> {
    let family = spec.family;
    let paired_cov = paired_covariance_sym(data, s)?;

    let total_cov = if matches!(
        family,
        ModelFamily::SemiCca | ModelFamily::USemiCca | ModelFamily::S2Gca | ModelFamily::US2Gca
    ) {
        Some(total_covariance(data, s)?)
    } else {
        None
    };

    let laplacian_reg = if family.uses_laplacian() {
        let l = heat_knn_laplacian(data, s, spec.graph.laplacian_knn, spec.graph.heat_scale)?;
        let x = data.view(s);
        let reg = (x * l.as_matrix() * x.transpose()).scale(spec.gamma2);
        let mut reg = SymMatrix::from_dense(&reg)?.into_matrix();
        for i in 0..reg.nrows() {
            reg[(i, i)] += spec.gamma1;
        }
        Some(SymMatrix::from_dense(&reg)?)
    } else {
        None
    };

    let (scatter_w, scatter_b) = if family.is_semi_supervised() {
        let (x_hat, classes) = data.labeled_view(s)?;
        let (w_w, w_b) = match spec.graph.kind {
            GraphKind::Lda => lda_graphs(&classes)?,
            GraphKind::Lfda => lfda_graphs(&x_hat, &classes, spec.graph.knn)?,
            GraphKind::Mfa => {
                mfa_graphs(&x_hat, &classes, spec.graph.knn, spec.graph.knn_penalty)?
            }
        };
        let (s_w, s_b) = scatter_matrices(&x_hat, &w_w, &w_b)?;
        (Some(s_w), Some(s_b))
    } else {
        (None, None)
    };

    Ok(ViewTerms {
        paired_cov,
        total_cov,
        laplacian_reg,
        scatter_w,
        scatter_b,
    })
}

fn shifted_identity(dim: usize, scale: f64) -> SymMatrix {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = scale;
    }
    SymMatrix::from_exact(m).expect("diagonal matrix is symmetric")
}

fn add(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    SymMatrix::from_exact(a.as_matrix() + b.as_matrix()).expect("sum of symmetric matrices")
}

fn scale(a: &SymMatrix, t: f64) -> SymMatrix {
    if t == 0.0 {
        return SymMatrix::zeros(a.dim());
    }
    SymMatrix::from_exact(a.as_matrix().scale(t)).expect("scaled symmetric matrix")
}

/// Builds the joint trace-maximization instance for the five models with
/// per-view uncorrelated constraints. The constraint matrix always receives
/// `ridge * I` on top of the model terms.
pub fn build_joint(data: &TwoViewData, spec: &ModelSpec) -> Result<JointProblem> {
    spec.validate()?;
    if !spec.family.is_uncorrelated() {
        return Err(Error::BadFamily(format!(
            "{} is a generalized-eigenvalue baseline, not a joint-problem model",
            spec.family
        )));
    }
    let c12 = cross_covariance(data, ViewId::View1, ViewId::View2)?;
    let t1 = view_terms(data, ViewId::View1, spec)?;
    let t2 = view_terms(data, ViewId::View2, spec)?;
    let (d1, d2) = data.dims();

    let (a1, a2, c, psi1, psi2) = match spec.family {
        ModelFamily::USemiCca => {
            let g = spec.gamma;
            let a = |t: &ViewTerms| scale(t.total_cov.as_ref().expect("built above"), 1.0 - g);
            let psi = |t: &ViewTerms, d: usize| {
                add(&scale(&t.paired_cov, g), &shifted_identity(d, 1.0 - g))
            };
            (
                a(&t1),
                a(&t2),
                c12.scale(g),
                psi(&t1, d1),
                psi(&t2, d2),
            )
        }
        ModelFamily::USemiCcaLr => {
            let psi = |t: &ViewTerms| {
                add(t.laplacian_reg.as_ref().expect("built above"), &t.paired_cov)
            };
            (
                SymMatrix::zeros(d1),
                SymMatrix::zeros(d2),
                c12,
                psi(&t1),
                psi(&t2),
            )
        }
        ModelFamily::UScca => {
            let eta = spec.eta;
            let a = |t: &ViewTerms| scale(t.scatter_b.as_ref().expect("built above"), eta);
            let psi = |t: &ViewTerms| scale(t.scatter_w.as_ref().expect("built above"), eta);
            (a(&t1), a(&t2), c12, psi(&t1), psi(&t2))
        }
        ModelFamily::US2Gca => {
            let (g, eta) = (spec.gamma, spec.eta);
            let a = |t: &ViewTerms| {
                add(
                    &scale(t.scatter_b.as_ref().expect("built above"), eta),
                    &scale(t.total_cov.as_ref().expect("built above"), 1.0 - g),
                )
            };
            let psi = |t: &ViewTerms, d: usize| {
                add(
                    &scale(t.scatter_w.as_ref().expect("built above"), eta),
                    &shifted_identity(d, 1.0 - g),
                )
            };
            (
                a(&t1),
                a(&t2),
                c12.scale(g),
                psi(&t1, d1),
                psi(&t2, d2),
            )
        }
        ModelFamily::US2CcaLr => {
            let eta = spec.eta;
            let a = |t: &ViewTerms| scale(t.scatter_b.as_ref().expect("built above"), eta);
            let psi = |t: &ViewTerms| {
                add(
                    &scale(t.scatter_w.as_ref().expect("built above"), eta),
                    t.laplacian_reg.as_ref().expect("built above"),
                )
            };
            (a(&t1), a(&t2), c12, psi(&t1), psi(&t2))
        }
        _ => unreachable!("uncorrelated families handled above"),
    };

    let b1 = add(&psi1, &shifted_identity(d1, spec.ridge));
    let b2 = add(&psi2, &shifted_identity(d2, spec.ridge));
    JointProblem::new(a1, a2, c, b1, b2)
}

fn block2x2(m11: &SymMatrix, m12: &DMatrix<f64>, m22: &SymMatrix) -> Result<SymMatrix> {
    let (d1, d2) = (m11.dim(), m22.dim());
    if m12.nrows() != d1 || m12.ncols() != d2 {
        return Err(Error::DimensionMismatch(format!(
            "cross block is {}x{}, diagonal blocks are {d1} and {d2}",
            m12.nrows(),
            m12.ncols()
        )));
    }
    let n = d1 + d2;
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (d1, d1)).copy_from(m11.as_matrix());
    out.view_mut((0, d1), (d1, d2)).copy_from(m12);
    out.view_mut((d1, 0), (d2, d1)).copy_from(&m12.transpose());
    out.view_mut((d1, d1), (d2, d2)).copy_from(m22.as_matrix());
    SymMatrix::from_dense(&out)
}

fn block_diag(m11: &SymMatrix, m22: &SymMatrix) -> SymMatrix {
    block2x2(m11, &DMatrix::zeros(m11.dim(), m22.dim()), m22).expect("zero cross block")
}

/// Builds the symmetric-definite pencil for the six baseline formulations;
/// `ridge * I` is added to the right-hand side.
pub fn build_gep(data: &TwoViewData, spec: &ModelSpec) -> Result<GepProblem> {
    spec.validate()?;
    if spec.family.is_uncorrelated() {
        return Err(Error::BadFamily(format!(
            "{} has per-view uncorrelated constraints; build a joint problem instead",
            spec.family
        )));
    }
    let c12 = cross_covariance(data, ViewId::View1, ViewId::View2)?;
    let t1 = view_terms(data, ViewId::View1, spec)?;
    let t2 = view_terms(data, ViewId::View2, spec)?;
    let (d1, d2) = data.dims();

    let (lhs, rhs) = match spec.family {
        ModelFamily::Cca => {
            let lhs = block2x2(&SymMatrix::zeros(d1), &c12, &SymMatrix::zeros(d2))?;
            let rhs = block_diag(&t1.paired_cov, &t2.paired_cov);
            (lhs, rhs)
        }
        ModelFamily::SemiCca => {
            let g = spec.gamma;
            let lhs = block2x2(
                &scale(t1.total_cov.as_ref().expect("built above"), 1.0 - g),
                &c12.scale(g),
                &scale(t2.total_cov.as_ref().expect("built above"), 1.0 - g),
            )?;
            let rhs_block = |t: &ViewTerms, d: usize| {
                add(&scale(&t.paired_cov, g), &shifted_identity(d, 1.0 - g))
            };
            (lhs, block_diag(&rhs_block(&t1, d1), &rhs_block(&t2, d2)))
        }
        ModelFamily::SemiCcaLr => {
            let lhs = block2x2(&SymMatrix::zeros(d1), &c12, &SymMatrix::zeros(d2))?;
            let rhs_block =
                |t: &ViewTerms| add(&t.paired_cov, t.laplacian_reg.as_ref().expect("built above"));
            (lhs, block_diag(&rhs_block(&t1), &rhs_block(&t2)))
        }
        ModelFamily::S2Gca => {
            let (g, eta) = (spec.gamma, spec.eta);
            let m_block = |t: &ViewTerms| {
                let margin = add(
                    &scale(t.scatter_b.as_ref().expect("built above"), eta),
                    &scale(t.scatter_w.as_ref().expect("built above"), -eta),
                );
                add(&margin, &scale(t.total_cov.as_ref().expect("built above"), 1.0 - g))
            };
            let lhs = block2x2(&m_block(&t1), &c12.scale(g), &m_block(&t2))?;
            let rhs_block = |t: &ViewTerms, d: usize| {
                add(&scale(&t.paired_cov, g), &shifted_identity(d, 1.0 - g))
            };
            (lhs, block_diag(&rhs_block(&t1, d1), &rhs_block(&t2, d2)))
        }
        ModelFamily::Scca => {
            let eta = spec.eta;
            let margin = |t: &ViewTerms| {
                add(
                    &scale(t.scatter_b.as_ref().expect("built above"), eta),
                    &scale(t.scatter_w.as_ref().expect("built above"), -eta),
                )
            };
            let lhs = block2x2(&margin(&t1), &c12, &margin(&t2))?;
            (lhs, block_diag(&t1.paired_cov, &t2.paired_cov))
        }
        ModelFamily::S2CcaLr => {
            let eta = spec.eta;
            let margin = |t: &ViewTerms| {
                add(
                    &scale(t.scatter_b.as_ref().expect("built above"), eta),
                    &scale(t.scatter_w.as_ref().expect("built above"), -eta),
                )
            };
            let lhs = block2x2(&margin(&t1), &c12, &margin(&t2))?;
            let rhs_block =
                |t: &ViewTerms| add(&t.paired_cov, t.laplacian_reg.as_ref().expect("built above"));
            (lhs, block_diag(&rhs_block(&t1), &rhs_block(&t2)))
        }
        _ => unreachable!("baseline families handled above"),
    };

    let rhs = add(&rhs, &shifted_identity(d1 + d2, spec.ridge));
    GepProblem::new(lhs, rhs, spec.k, d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn labeled_fixture(rng: &mut ChaCha8Rng, d1: usize, d2: usize, n: usize) -> TwoViewData {
        let view1 = DMatrix::from_fn(d1, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let view2 = DMatrix::from_fn(d2, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let labels: Vec<(usize, usize)> = (0..n).map(|i| (i, i % 3)).collect();
        TwoViewData::new(view1, view2, n / 2, labels.clone(), labels).unwrap()
    }

    #[test]
    fn usemicca_gamma_one_is_exactly_the_cca_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = labeled_fixture(&mut rng, 4, 3, 12);
        let mut spec = ModelSpec::new(ModelFamily::USemiCca);
        spec.gamma = 1.0;
        let jp = build_joint(&data, &spec).unwrap();

        let c12 = cross_covariance(&data, ViewId::View1, ViewId::View2).unwrap();
        let c11 = paired_covariance_sym(&data, ViewId::View1).unwrap();
        let c22 = paired_covariance_sym(&data, ViewId::View2).unwrap();
        assert_eq!(jp.c, c12);
        assert_eq!(jp.a1.as_matrix(), SymMatrix::zeros(4).as_matrix());
        assert_eq!(jp.a2.as_matrix(), SymMatrix::zeros(3).as_matrix());
        assert_eq!(jp.b1.as_matrix(), c11.shifted(spec.ridge).as_matrix());
        assert_eq!(jp.b2.as_matrix(), c22.shifted(spec.ridge).as_matrix());
    }

    #[test]
    fn usemicca_gamma_zero_is_per_view_pca() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = labeled_fixture(&mut rng, 4, 3, 12);
        let mut spec = ModelSpec::new(ModelFamily::USemiCca);
        spec.gamma = 0.0;
        let jp = build_joint(&data, &spec).unwrap();
        assert!(jp.c.norm() == 0.0);
        let t1 = total_covariance(&data, ViewId::View1).unwrap();
        assert_abs_diff_eq!(jp.a1.as_matrix(), t1.as_matrix(), epsilon = 1e-14);
        // constraint collapses to (1 + ridge) * I
        let expected = shifted_identity(4, 1.0 + spec.ridge);
        assert_abs_diff_eq!(jp.b1.as_matrix(), expected.as_matrix(), epsilon = 1e-14);
    }

    #[test]
    fn uscca_matches_hand_assembled_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data = labeled_fixture(&mut rng, 3, 3, 9);
        let mut spec = ModelSpec::new(ModelFamily::UScca);
        spec.eta = 2.0;
        let jp = build_joint(&data, &spec).unwrap();

        for (s, a, b) in [
            (ViewId::View1, &jp.a1, &jp.b1),
            (ViewId::View2, &jp.a2, &jp.b2),
        ] {
            let (x_hat, classes) = data.labeled_view(s).unwrap();
            let (w_w, w_b) = lda_graphs(&classes).unwrap();
            let (s_w, s_b) = scatter_matrices(&x_hat, &w_w, &w_b).unwrap();
            let want_a = s_b.as_matrix().scale(2.0);
            let want_b = {
                let mut m = s_w.as_matrix().scale(2.0);
                for i in 0..3 {
                    m[(i, i)] += spec.ridge;
                }
                m
            };
            assert_abs_diff_eq!(a.as_matrix(), &want_a, epsilon = 1e-12);
            assert_abs_diff_eq!(b.as_matrix(), &want_b, epsilon = 1e-12);
        }
        assert_eq!(
            jp.c,
            cross_covariance(&data, ViewId::View1, ViewId::View2).unwrap()
        );
    }

    #[test]
    fn uscca_requires_positive_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = labeled_fixture(&mut rng, 3, 3, 9);
        let mut spec = ModelSpec::new(ModelFamily::UScca);
        spec.eta = 0.0;
        assert!(matches!(
            build_joint(&data, &spec),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn us2gca_at_eta_zero_gamma_one_keeps_cca_objective() {
        // the objective matrices collapse to CCA's; the constraint follows
        // eta * Sw + (1 - gamma) * I and is ridge-only at this corner
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = labeled_fixture(&mut rng, 4, 3, 12);
        let mut spec = ModelSpec::new(ModelFamily::US2Gca);
        spec.eta = 0.0;
        spec.gamma = 1.0;
        let jp = build_joint(&data, &spec).unwrap();
        assert_eq!(jp.a1.as_matrix(), SymMatrix::zeros(4).as_matrix());
        assert_eq!(jp.a2.as_matrix(), SymMatrix::zeros(3).as_matrix());
        assert_eq!(
            jp.c,
            cross_covariance(&data, ViewId::View1, ViewId::View2).unwrap()
        );
        assert_eq!(
            jp.b1.as_matrix(),
            shifted_identity(4, spec.ridge).as_matrix()
        );
    }

    #[test]
    fn build_joint_rejects_baseline_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let data = labeled_fixture(&mut rng, 3, 3, 9);
        let spec = ModelSpec::new(ModelFamily::SemiCca);
        assert!(matches!(build_joint(&data, &spec), Err(Error::BadFamily(_))));
        let spec = ModelSpec::new(ModelFamily::USemiCca);
        assert!(matches!(build_gep(&data, &spec), Err(Error::BadFamily(_))));
    }

    #[test]
    fn semicca_gamma_one_reduces_to_cca_pencil() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let data = labeled_fixture(&mut rng, 4, 3, 12);
        let mut spec = ModelSpec::new(ModelFamily::SemiCca);
        spec.gamma = 1.0;
        let gep = build_gep(&data, &spec).unwrap();
        let mut cca = ModelSpec::new(ModelFamily::Cca);
        cca.k = spec.k;
        let gep_cca = build_gep(&data, &cca).unwrap();
        assert_eq!(gep.lhs.as_matrix(), gep_cca.lhs.as_matrix());
        assert_eq!(gep.rhs.as_matrix(), gep_cca.rhs.as_matrix());
    }

    #[test]
    fn s2gca_eta_zero_equals_semicca_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let data = labeled_fixture(&mut rng, 4, 3, 12);
        let mut spec = ModelSpec::new(ModelFamily::S2Gca);
        spec.eta = 0.0;
        spec.gamma = 0.7;
        let gep = build_gep(&data, &spec).unwrap();
        let mut semi = ModelSpec::new(ModelFamily::SemiCca);
        semi.gamma = 0.7;
        let gep_semi = build_gep(&data, &semi).unwrap();
        assert_eq!(gep.lhs.as_matrix(), gep_semi.lhs.as_matrix());
        assert_eq!(gep.rhs.as_matrix(), gep_semi.rhs.as_matrix());
    }

    #[test]
    fn semiccalr_matches_formula_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let data = labeled_fixture(&mut rng, 3, 2, 10);
        let mut spec = ModelSpec::new(ModelFamily::SemiCcaLr);
        spec.gamma1 = 0.1;
        spec.gamma2 = 0.4;
        spec.graph.laplacian_knn = 3;
        spec.graph.heat_scale = 1.0;
        let gep = build_gep(&data, &spec).unwrap();

        // off-diagonal lhs block is the paired cross covariance
        let c12 = cross_covariance(&data, ViewId::View1, ViewId::View2).unwrap();
        assert_abs_diff_eq!(
            &gep.lhs.as_matrix().view((0, 3), (3, 2)).into_owned(),
            &c12,
            epsilon = 1e-14
        );
        // rhs upper block: C11 + gamma1 I + gamma2 X L X' + ridge I
        let l1 = heat_knn_laplacian(&data, ViewId::View1, 3, 1.0).unwrap();
        let x1 = data.view(ViewId::View1);
        let c11 = paired_covariance_sym(&data, ViewId::View1).unwrap();
        let want = c11.as_matrix()
            + (x1 * l1.as_matrix() * x1.transpose()).scale(0.4)
            + DMatrix::identity(3, 3).scale(0.1 + spec.ridge);
        assert_abs_diff_eq!(
            &gep.rhs.as_matrix().view((0, 0), (3, 3)).into_owned(),
            &want,
            epsilon = 1e-12
        );
    }

    #[test]
    fn scca_blocks_match_margin_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let data = labeled_fixture(&mut rng, 3, 3, 9);
        let mut spec = ModelSpec::new(ModelFamily::Scca);
        spec.eta = 0.5;
        let gep = build_gep(&data, &spec).unwrap();
        let (x_hat, classes) = data.labeled_view(ViewId::View1).unwrap();
        let (w_w, w_b) = lda_graphs(&classes).unwrap();
        let (s_w, s_b) = scatter_matrices(&x_hat, &w_w, &w_b).unwrap();
        let want = (s_b.as_matrix() - s_w.as_matrix()).scale(0.5);
        assert_abs_diff_eq!(
            &gep.lhs.as_matrix().view((0, 0), (3, 3)).into_owned(),
            &want,
            epsilon = 1e-12
        );
        // rhs is the paired covariances plus ridge only
        let c11 = paired_covariance_sym(&data, ViewId::View1).unwrap();
        assert_abs_diff_eq!(
            &gep.rhs.as_matrix().view((0, 0), (3, 3)).into_owned(),
            &c11.shifted(spec.ridge).into_matrix(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn missing_labels_surface_for_supervised_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let view1 = DMatrix::from_fn(3, 8, |_, _| rng.random::<f64>());
        let view2 = DMatrix::from_fn(3, 8, |_, _| rng.random::<f64>());
        let data = TwoViewData::unlabeled(view1, view2, 4).unwrap();
        let spec = ModelSpec::new(ModelFamily::UScca);
        assert!(matches!(
            build_joint(&data, &spec),
            Err(Error::MissingLabels(_))
        ));
    }
}
