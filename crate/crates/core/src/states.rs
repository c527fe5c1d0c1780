//! Pure and mixed states with subsystem metadata, Born-rule probabilities and
//! rank-1 projective collapse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, embed, herm_sqrt, partial_trace, tensor, tensor_vec, trace_norm, ComplexMatrix,
    ComplexRepr, DimSpec, C64, DEFAULT_TOL, TOL_PSD,
};

/// Probabilities below this are treated as impossible outcomes.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-12;
/// Purity deficit below which a density operator is treated as a pure state.
const PURE_TOL: f64 = 1e-12;

const NORM_TOL: f64 = 1e-9;

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: DimSpec,
}

/// Normalized copy of `amplitudes` tagged with `dims`.
pub fn make_pure(amplitudes: Vec<C64>, dims: DimSpec) -> Result<PureState> {
    PureState::new(amplitudes, dims)
}

/// `|ψ><ψ|`.
pub fn density_of(psi: &PureState) -> DensityOperator {
    psi.density()
}

/// `|<φ|χ>|²`.
pub fn fidelity_pure(phi: &PureState, chi: &PureState) -> Result<f64> {
    Ok(phi.inner(chi)?.norm_sqr().min(1.0))
}

/// Applies the rank-1 projector `|e><e|` on `targets` (identity elsewhere).
/// Returns the Born probability and the renormalized collapsed state.
pub fn measure_project(
    psi: &PureState,
    targets: &[usize],
    effect: &PureState,
) -> Result<(f64, PureState)> {
    let sub = psi.dims.select(targets)?;
    if sub.total() != effect.dim() {
        return Err(Error::DimensionMismatch(format!(
            "effect of dimension {} on factors {targets:?} of {}",
            effect.dim(),
            psi.dims
        )));
    }
    let projector = embed(&effect.projector(), &psi.dims, targets)?;
    let projected = projector.apply(&psi.amplitudes)?;
    let p = projected.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if p < IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome(p));
    }
    let post = PureState::new(projected, psi.dims.clone())?;
    Ok((p, post))
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, dims: DimSpec) -> Result<Self> {
        dims.check(amplitudes.len())?;
        let n = linalg::norm(&amplitudes);
        if n < 1e-15 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / n).collect();
        Ok(Self { amplitudes, dims })
    }

    /// Normalized state from real amplitudes on a single factor.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        let v: Vec<C64> = amplitudes.iter().map(|&x| linalg::re(x)).collect();
        let n = v.len();
        Self::new(v, DimSpec::single(n))
    }

    /// Computational basis vector `index` of the composite space `dims`.
    pub fn basis(dims: &DimSpec, index: usize) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for {dims}"
            )));
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[index] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes: v,
            dims: dims.clone(),
        })
    }

    /// Tensor product of single states, leftmost first.
    pub fn product(parts: &[&PureState]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::DimensionMismatch("empty product".into()))?;
        Ok(rest.iter().fold((*first).clone(), |acc, p| acc.tensor(p)))
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: tensor_vec(&self.amplitudes, &other.amplitudes),
            dims: self.dims.concat(&other.dims),
        }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn dims(&self) -> &DimSpec {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Same vector, relabeled with new subsystem dimensions.
    pub fn with_dims(&self, dims: DimSpec) -> Result<Self> {
        dims.check(self.dim())?;
        Ok(Self {
            amplitudes: self.amplitudes.clone(),
            dims,
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "inner product of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    /// Multiplies by the unit-modulus phase `e^{iθ}`.
    pub fn with_phase(&self, theta: f64) -> PureState {
        let ph = C64::from_polar(1.0, theta);
        PureState {
            amplitudes: self.amplitudes.iter().map(|a| a * ph).collect(),
            dims: self.dims.clone(),
        }
    }

    /// `U|ψ>`, keeping the subsystem dimensions. `U` must preserve the norm.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<PureState> {
        self.evolve_into(u, self.dims.clone())
    }

    /// `U|ψ>` with the output labeled by `dims_out`.
    pub fn evolve_into(&self, u: &ComplexMatrix, dims_out: DimSpec) -> Result<PureState> {
        let v = u.apply(&self.amplitudes)?;
        dims_out.check(v.len())?;
        let n = linalg::norm(&v);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState {
            amplitudes: v.into_iter().map(|a| a / n).collect(),
            dims: dims_out,
        })
    }

    /// `|ψ><ψ|` as a plain matrix.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.projector(),
            dims: self.dims.clone(),
        }
    }

    /// Born probability `|<e|ψ>|²` of a full-space effect.
    pub fn probability(&self, effect: &PureState) -> Result<f64> {
        fidelity_pure(effect, self)
    }

    /// Reduced state on `keep`.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        self.density().reduced(keep)
    }

    /// Same physical state up to global phase.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        fidelity_pure(self, other).is_ok_and(|f| f >= 1.0 - tol)
    }

    pub fn to_repr(&self) -> Vec<ComplexRepr> {
        self.amplitudes.iter().map(|&z| z.into()).collect()
    }
}

/// Unit-trace Hermitian positive semi-definite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: DimSpec,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(matrix: ComplexMatrix, dims: DimSpec) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        dims.check(matrix.rows())?;
        let dev = matrix.hermitian_deviation();
        if dev > DEFAULT_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let (values, _) = linalg::eigh(&matrix)?;
        if let Some(&min) = values.first() {
            if min < -TOL_PSD {
                return Err(Error::NotPsd(min));
            }
        }
        Ok(Self { matrix, dims })
    }

    /// Divides a nonzero PSD matrix by its trace.
    pub fn normalized(matrix: ComplexMatrix, dims: DimSpec) -> Result<Self> {
        let tr = matrix.trace().re;
        if tr < IMPOSSIBLE_PROBABILITY {
            return Err(Error::ImpossibleOutcome(tr));
        }
        Self::new(matrix.scale_real(1.0 / tr), dims)
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: DimSpec) -> Self {
        Self { matrix, dims }
    }

    /// `I/d`.
    pub fn maximally_mixed(dims: &DimSpec) -> Self {
        let d = dims.total();
        Self {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            dims: dims.clone(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &DimSpec {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn with_dims(&self, dims: DimSpec) -> Result<Self> {
        dims.check(self.dim())?;
        Ok(Self {
            matrix: self.matrix.clone(),
            dims,
        })
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: tensor(&self.matrix, &other.matrix),
            dims: self.dims.concat(&other.dims),
        }
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let dims = self.dims.select(&keep)?;
        Ok(DensityOperator { matrix: m, dims })
    }

    /// Born probability `<e|ρ|e>` of a full-space rank-1 effect.
    pub fn probability(&self, effect: &PureState) -> Result<f64> {
        let v = self.matrix.apply(effect.amplitudes())?;
        Ok(linalg::inner(effect.amplitudes(), &v).re.clamp(0.0, 1.0))
    }

    /// Rank-1 collapse on `targets`: probability and renormalized post-state.
    pub fn project(&self, targets: &[usize], effect: &PureState) -> Result<(f64, DensityOperator)> {
        let sub = self.dims.select(targets)?;
        if sub.total() != effect.dim() {
            return Err(Error::DimensionMismatch(format!(
                "effect of dimension {} on factors {targets:?} of {}",
                effect.dim(),
                self.dims
            )));
        }
        let p_full = embed(&effect.projector(), &self.dims, targets)?;
        let post = &(&p_full * &self.matrix) * &p_full;
        let prob = post.trace().re;
        if prob < IMPOSSIBLE_PROBABILITY {
            return Err(Error::ImpossibleOutcome(prob.max(0.0)));
        }
        Ok((
            prob,
            DensityOperator {
                matrix: post.scale_real(1.0 / prob),
                dims: self.dims.clone(),
            },
        ))
    }

    /// `½ ‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "trace distance of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(0.5 * trace_norm(&(&self.matrix - &other.matrix))?)
    }

    /// Squared Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`; equals `<ψ|σ|ψ>` when ρ is pure.
    pub fn fidelity(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "fidelity of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        // the square-root route loses half the digits on rank-deficient inputs
        for (a, b) in [(self, other), (other, self)] {
            if a.purity() > 1.0 - PURE_TOL {
                if let Some(psi) = a.as_pure(PURE_TOL) {
                    return b.probability(&psi);
                }
            }
        }
        let s = herm_sqrt(&self.matrix)?;
        let inner = &(&s * &other.matrix) * &s;
        let root = herm_sqrt(&hermitize(&inner))?;
        Ok(root.trace().re.powi(2).clamp(0.0, 1.0))
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Dominant eigenvector when the state is pure within `tol`.
    pub fn as_pure(&self, tol: f64) -> Option<PureState> {
        let (values, vectors) = linalg::eigh(&self.matrix).ok()?;
        let top = *values.last()?;
        if top < 1.0 - tol {
            return None;
        }
        let n = self.dim();
        let v: Vec<C64> = (0..n).map(|r| vectors.get(r, n - 1)).collect();
        PureState::new(v, self.dims.clone()).ok()
    }

    pub fn to_file(&self) -> DensityMatrixFile {
        DensityMatrixFile {
            dim: self.dim(),
            entries: self
                .matrix
                .to_rows()
                .into_iter()
                .map(|row| row.into_iter().map(ComplexRepr::from).collect())
                .collect(),
        }
    }
}

pub(crate) fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale_real(0.5)
}

/// On-disk JSON form of a density matrix: `{dim, entries: [[{re, im}, ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<ComplexRepr>>,
}

impl DensityMatrixFile {
    /// Validates against the density-operator invariants.
    pub fn to_density(&self, dims: Option<DimSpec>) -> Result<DensityOperator> {
        if self.entries.len() != self.dim || self.entries.iter().any(|r| r.len() != self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "declared dim {} does not match entries",
                self.dim
            )));
        }
        let rows: Vec<Vec<C64>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&z| z.into()).collect())
            .collect();
        let m = ComplexMatrix::from_rows(&rows)?;
        DensityOperator::new(m, dims.unwrap_or_else(|| DimSpec::single(self.dim)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    fn q(amps: &[f64]) -> PureState {
        PureState::from_real(amps).unwrap()
    }

    #[test]
    fn make_pure_normalizes() {
        let zero = make_pure(vec![re(1.0), re(0.0)], DimSpec::single(2)).unwrap();
        assert_eq!(zero.amplitudes(), &[re(1.0), re(0.0)]);
        let plus = make_pure(vec![re(1.0), re(1.0)], DimSpec::single(2)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((plus.amplitude(0) - re(h)).norm() < 1e-15);
        assert!((plus.amplitude(1) - re(h)).norm() < 1e-15);
        let r: f64 = 0.5;
        let phi = make_pure(vec![re((1.0 - r).sqrt()), re(r.sqrt())], DimSpec::single(2)).unwrap();
        assert!(phi.same_ray(&plus, 1e-12));
    }

    #[test]
    fn make_pure_rejects_zero_and_bad_dims() {
        assert_eq!(
            make_pure(vec![re(0.0), re(0.0)], DimSpec::single(2)),
            Err(Error::ZeroVector)
        );
        assert!(make_pure(vec![re(1.0)], DimSpec::single(2)).is_err());
    }

    #[test]
    fn density_of_basis_and_plus() {
        let d0 = density_of(&q(&[1.0, 0.0]));
        assert_eq!(d0.matrix(), &ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));
        let dp = density_of(&q(&[1.0, 1.0]));
        let half = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(dp.matrix().approx_eq(&half, 1e-15));
    }

    #[test]
    fn fidelity_of_basis_states() {
        let zero = q(&[1.0, 0.0]);
        let one = q(&[0.0, 1.0]);
        assert_eq!(fidelity_pure(&zero, &zero).unwrap(), 1.0);
        assert_eq!(fidelity_pure(&zero, &one).unwrap(), 0.0);
        assert!(fidelity_pure(&zero, &q(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn fidelity_with_minus_on_apparatus() {
        // |1_S 0_A> against |1_S -_A>
        let a = q(&[0.0, 1.0]).tensor(&q(&[1.0, 0.0]));
        let b = q(&[0.0, 1.0]).tensor(&q(&[1.0, -1.0]));
        assert!((fidelity_pure(&a, &b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn measure_orthogonal_effect_is_impossible() {
        let zz = q(&[1.0, 0.0]).tensor(&q(&[1.0, 0.0]));
        let err = measure_project(&zz, &[1], &q(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::ImpossibleOutcome(_)));
    }

    #[test]
    fn measure_rejects_mismatched_effect() {
        let zz = q(&[1.0, 0.0]).tensor(&q(&[1.0, 0.0]));
        assert!(measure_project(&zz, &[1], &q(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn mixed_projection_matches_pure_projection() {
        let psi = make_pure(
            vec![c(0.3, 0.1), c(0.0, -0.5), re(0.7), c(0.2, 0.2)],
            DimSpec::qubits(2),
        )
        .unwrap();
        let e = make_pure(vec![re(1.0), c(0.0, 1.0)], DimSpec::single(2)).unwrap();
        let (p1, post1) = measure_project(&psi, &[0], &e).unwrap();
        let (p2, post2) = psi.density().project(&[0], &e).unwrap();
        assert!((p1 - p2).abs() < 1e-12);
        assert!(post2.matrix().approx_eq(&post1.projector(), 1e-12));
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.4]);
        assert!(matches!(
            DensityOperator::new(bad_trace, DimSpec::single(2)),
            Err(Error::InvalidTrace(_))
        ));
        let negative = ComplexMatrix::from_real_diagonal(&[1.1, -0.1]);
        assert!(matches!(
            DensityOperator::new(negative, DimSpec::single(2)),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn trace_distance_and_fidelity_of_mixed_states() {
        let a = DensityOperator::new(
            ComplexMatrix::from_real_diagonal(&[0.75, 0.25]),
            DimSpec::single(2),
        )
        .unwrap();
        let b = DensityOperator::maximally_mixed(&DimSpec::single(2));
        assert!((a.trace_distance(&b).unwrap() - 0.25).abs() < 1e-12);
        let f = a.fidelity(&b).unwrap();
        let expected = ((0.75f64 * 0.5).sqrt() + (0.25f64 * 0.5).sqrt()).powi(2);
        assert!((f - expected).abs() < 1e-12);
    }

    #[test]
    fn prior_file_round_trip() {
        let rho = density_of(&make_pure(vec![re(1.0), c(0.0, 1.0)], DimSpec::single(2)).unwrap());
        let json = serde_json::to_string(&rho.to_file()).unwrap();
        let parsed: DensityMatrixFile = serde_json::from_str(&json).unwrap();
        let back = parsed.to_density(None).unwrap();
        assert!(back.matrix().approx_eq(rho.matrix(), 1e-15));
        let bad = DensityMatrixFile {
            dim: 3,
            entries: parsed.entries,
        };
        assert!(bad.to_density(None).is_err());
    }
}
