//! Completely positive maps in Kraus form, unitary channels, trace duals and
//! completion of partially specified isometries.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, DimSpec, C64, DEFAULT_TOL};
use crate::states::{DensityOperator, PureState};

/// A completely positive map `X -> Σ K X K†`, not necessarily trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    kraus: Vec<ComplexMatrix>,
    dims_in: DimSpec,
    dims_out: DimSpec,
}

impl KrausMap {
    pub fn new(kraus: Vec<ComplexMatrix>, dims_in: DimSpec, dims_out: DimSpec) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Kraus set".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != rows || k.cols() != cols) {
            return Err(Error::DimensionMismatch(
                "Kraus operators differ in shape".into(),
            ));
        }
        dims_in.check(cols)?;
        dims_out.check(rows)?;
        Ok(Self {
            kraus,
            dims_in,
            dims_out,
        })
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dims_in(&self) -> &DimSpec {
        &self.dims_in
    }

    pub fn dims_out(&self) -> &DimSpec {
        &self.dims_out
    }

    pub fn dim_in(&self) -> usize {
        self.dims_in.total()
    }

    pub fn dim_out(&self) -> usize {
        self.dims_out.total()
    }

    /// `Σ K X K†` for an arbitrary operator `X`.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in() || x.cols() != self.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator into map with input dimension {}",
                x.rows(),
                x.cols(),
                self.dim_in()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out(), self.dim_out());
        for k in &self.kraus {
            out = &out + &(&(k * x) * &k.adjoint());
        }
        Ok(out)
    }

    /// Trace dual: the map with Kraus operators `K†`.
    pub fn adjoint(&self) -> KrausMap {
        KrausMap {
            kraus: self.kraus.iter().map(ComplexMatrix::adjoint).collect(),
            dims_in: self.dims_out.clone(),
            dims_out: self.dims_in.clone(),
        }
    }

    /// `max |Σ K†K - I|`.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let sum = self.kraus.iter().fold(
            ComplexMatrix::zeros(self.dim_in(), self.dim_in()),
            |acc, k| &acc + &(&k.adjoint() * k),
        );
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim_in()))
    }

    /// `max |Σ KK† - I|`; only meaningful when input and output dimensions agree.
    pub fn unitality_deviation(&self) -> f64 {
        let sum = self.kraus.iter().fold(
            ComplexMatrix::zeros(self.dim_out(), self.dim_out()),
            |acc, k| &acc + &(k * &k.adjoint()),
        );
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim_out()))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_deviation() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.dim_in() == self.dim_out() && self.unitality_deviation() <= tol
    }

    /// Promotes to a [`Channel`] when trace preserving.
    pub fn into_channel(self) -> Result<Channel> {
        let dev = self.trace_preservation_deviation();
        if dev > DEFAULT_TOL {
            return Err(Error::InvalidChannel(dev));
        }
        Ok(Channel { map: self })
    }
}

/// A CPTP map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    map: KrausMap,
}

/// Validates `Σ K†K = I` and builds the channel.
pub fn channel_from_kraus(
    kraus: Vec<ComplexMatrix>,
    dims_in: DimSpec,
    dims_out: DimSpec,
) -> Result<Channel> {
    KrausMap::new(kraus, dims_in, dims_out)?.into_channel()
}

/// Single-Kraus channel `ρ -> U ρ U†`.
pub fn channel_from_unitary(u: &ComplexMatrix) -> Result<Channel> {
    let dims = DimSpec::single(u.cols());
    Channel::unitary(u, dims)
}

/// `Σ K ρ K†` on a density operator.
pub fn apply_channel(channel: &Channel, rho: &DensityOperator) -> Result<DensityOperator> {
    channel.apply(rho)
}

/// The trace dual `Λ†`, which need not be trace preserving.
pub fn adjoint_channel(channel: &Channel) -> KrausMap {
    channel.map.adjoint()
}

impl Channel {
    pub fn from_kraus(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Kraus set".into()))?;
        let (din, dout) = (first.cols(), first.rows());
        channel_from_kraus(kraus, DimSpec::single(din), DimSpec::single(dout))
    }

    /// Unitary channel on a space with subsystem structure `dims`.
    pub fn unitary(u: &ComplexMatrix, dims: DimSpec) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        let dev = u.unitarity_deviation();
        if dev > DEFAULT_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            map: KrausMap::new(vec![u.clone()], dims.clone(), dims)?,
        })
    }

    pub fn identity(dims: DimSpec) -> Self {
        let d = dims.total();
        Self {
            map: KrausMap {
                kraus: vec![ComplexMatrix::identity(d)],
                dims_in: dims.clone(),
                dims_out: dims,
            },
        }
    }

    /// Relabels input and output subsystem structure.
    pub fn with_dims(&self, dims_in: DimSpec, dims_out: DimSpec) -> Result<Self> {
        dims_in.check(self.dim_in())?;
        dims_out.check(self.dim_out())?;
        Ok(Self {
            map: KrausMap {
                kraus: self.map.kraus.clone(),
                dims_in,
                dims_out,
            },
        })
    }

    pub fn as_map(&self) -> &KrausMap {
        &self.map
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.map.kraus
    }

    pub fn dims_in(&self) -> &DimSpec {
        &self.map.dims_in
    }

    pub fn dims_out(&self) -> &DimSpec {
        &self.map.dims_out
    }

    pub fn dim_in(&self) -> usize {
        self.map.dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.map.dim_out()
    }

    /// The unitary, when this is a single-Kraus channel with a unitary operator.
    pub fn as_unitary(&self) -> Option<&ComplexMatrix> {
        match self.map.kraus.as_slice() {
            [u] if u.is_square() && u.unitarity_deviation() <= DEFAULT_TOL => Some(u),
            _ => None,
        }
    }

    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.map.apply_matrix(x)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.map.apply_matrix(rho.matrix())?;
        Ok(DensityOperator::from_parts_unchecked(
            crate::states::hermitize(&out),
            self.map.dims_out.clone(),
        ))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.dim_out() != next.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose output {} with input {}",
                self.dim_out(),
                next.dim_in()
            )));
        }
        let kraus = next
            .kraus()
            .iter()
            .flat_map(|b| self.kraus().iter().map(move |a| b * a))
            .collect();
        Ok(Channel {
            map: KrausMap {
                kraus,
                dims_in: self.map.dims_in.clone(),
                dims_out: next.map.dims_out.clone(),
            },
        })
    }

    /// Trace dual.
    pub fn adjoint(&self) -> KrausMap {
        self.map.adjoint()
    }
}

/// A partially specified isometry: input states and their images.
#[derive(Clone, Debug)]
pub struct PartialIsometrySpec {
    pairs: Vec<(PureState, PureState)>,
    dim_in: usize,
    dim_out: usize,
}

impl PartialIsometrySpec {
    /// Checks that inputs (and outputs) are mutually orthogonal and that
    /// pairwise inner products are preserved.
    pub fn new(pairs: Vec<(PureState, PureState)>) -> Result<Self> {
        let (first_in, first_out) = pairs
            .first()
            .ok_or_else(|| Error::InconsistentIsometry("no pairs given".into()))?;
        let dim_in = first_in.dim();
        let dim_out = first_out.dim();
        for (i, o) in &pairs {
            if i.dim() != dim_in || o.dim() != dim_out {
                return Err(Error::InconsistentIsometry(
                    "pairs disagree on dimensions".into(),
                ));
            }
        }
        for a in 0..pairs.len() {
            for b in (a + 1)..pairs.len() {
                let gi = pairs[a].0.inner(&pairs[b].0)?;
                let go = pairs[a].1.inner(&pairs[b].1)?;
                if gi.norm() > DEFAULT_TOL {
                    return Err(Error::InconsistentIsometry(format!(
                        "inputs {a} and {b} are not orthogonal"
                    )));
                }
                if (gi - go).norm() > DEFAULT_TOL {
                    return Err(Error::InconsistentIsometry(format!(
                        "pair {a}, {b} does not preserve inner products"
                    )));
                }
            }
        }
        Ok(Self {
            pairs,
            dim_in,
            dim_out,
        })
    }

    pub fn pairs(&self) -> &[(PureState, PureState)] {
        &self.pairs
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }
}

/// Orthonormal completion of `span` by Gram-Schmidt over the standard basis,
/// in standard-basis order.
fn complement_basis(span: &[Vec<C64>], dim: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = span.to_vec();
    let mut extra = Vec::new();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj = linalg::inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let n = linalg::norm(&v);
        if n > 1e-8 {
            let v: Vec<C64> = v.into_iter().map(|x| x / n).collect();
            basis.push(v.clone());
            extra.push(v);
        }
    }
    extra
}

/// Extends a partial isometry to a unitary. Leftover input directions, found
/// by Gram-Schmidt of the standard basis against the specified inputs, are
/// paired in order with the leftover output directions found the same way.
pub fn complete_isometry(spec: &PartialIsometrySpec) -> Result<ComplexMatrix> {
    if spec.dim_in != spec.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "completion needs equal dimensions, got {} -> {}",
            spec.dim_in, spec.dim_out
        )));
    }
    let d = spec.dim_in;
    let inputs: Vec<Vec<C64>> = spec
        .pairs
        .iter()
        .map(|(i, _)| i.amplitudes().to_vec())
        .collect();
    let outputs: Vec<Vec<C64>> = spec
        .pairs
        .iter()
        .map(|(_, o)| o.amplitudes().to_vec())
        .collect();
    let extra_in = complement_basis(&inputs, d);
    let extra_out = complement_basis(&outputs, d);
    if extra_in.len() != extra_out.len() || inputs.len() + extra_in.len() != d {
        return Err(Error::InconsistentIsometry(
            "could not complete to a unitary".into(),
        ));
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (i, o) in inputs
        .iter()
        .chain(&extra_in)
        .zip(outputs.iter().chain(&extra_out))
    {
        u = &u + &ComplexMatrix::outer(o, i);
    }
    let dev = u.unitarity_deviation();
    if dev > DEFAULT_TOL {
        return Err(Error::InconsistentIsometry(format!(
            "completion is not unitary (deviation {dev:e})"
        )));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::states::{density_of, fidelity_pure};

    fn q(amps: &[f64]) -> PureState {
        PureState::from_real(amps).unwrap()
    }

    fn reset_channel() -> Channel {
        let k0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let k1 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        Channel::from_kraus(vec![k0, k1]).unwrap()
    }

    #[test]
    fn identity_kraus_is_a_channel() {
        let ch = Channel::from_kraus(vec![ComplexMatrix::identity(2)]).unwrap();
        let rho = density_of(&q(&[0.6, 0.8]));
        assert!(ch
            .apply(&rho)
            .unwrap()
            .matrix()
            .approx_eq(rho.matrix(), 1e-15));
    }

    #[test]
    fn reset_maps_everything_to_zero_state() {
        let ch = reset_channel();
        let rho = density_of(&q(&[0.6, 0.8]));
        let out = apply_channel(&ch, &rho).unwrap();
        assert!(out
            .matrix()
            .approx_eq(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn amplitude_damping_is_valid_over_range() {
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let k0 =
                ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - p).sqrt()]]).unwrap();
            let k1 = ComplexMatrix::from_real_rows(&[&[0.0, p.sqrt()], &[0.0, 0.0]]).unwrap();
            // oracle: K0†K0 + K1†K1 = diag(1, 1-p) + diag(0, p)
            assert!(Channel::from_kraus(vec![k0, k1]).is_ok());
        }
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.5]]).unwrap();
        assert!(matches!(
            Channel::from_kraus(vec![bad]),
            Err(Error::InvalidChannel(_))
        ));
    }

    #[test]
    fn unitary_channel_checks_unitarity() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let ch = channel_from_unitary(&x).unwrap();
        let out = ch.apply(&density_of(&q(&[1.0, 0.0]))).unwrap();
        assert!(out
            .matrix()
            .approx_eq(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]), 1e-15));
        let not_u = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(
            channel_from_unitary(&not_u),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let ch = reset_channel();
        let rho = DensityOperator::maximally_mixed(&DimSpec::single(3));
        assert!(ch.apply(&rho).is_err());
    }

    #[test]
    fn adjoint_of_reset_is_expectation_times_identity() {
        let ch = reset_channel();
        let y = ComplexMatrix::from_rows(&[
            vec![re(0.3), crate::linalg::c(0.1, 0.2)],
            vec![crate::linalg::c(0.1, -0.2), re(-0.7)],
        ])
        .unwrap();
        let out = adjoint_channel(&ch).apply_matrix(&y).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::identity(2).scale_real(0.3), 1e-15));
        // reset is trace preserving but not unital; its adjoint is unital
        assert!(!ch.as_map().is_unital(1e-9));
        assert!(adjoint_channel(&ch).is_unital(1e-9));
    }

    #[test]
    fn double_adjoint_is_original() {
        let ch = reset_channel();
        assert_eq!(&ch.adjoint().adjoint(), ch.as_map());
    }

    #[test]
    fn completion_of_identity_spec() {
        let spec = PartialIsometrySpec::new(vec![
            (q(&[1.0, 0.0]), q(&[1.0, 0.0])),
            (q(&[0.0, 1.0]), q(&[0.0, 1.0])),
        ])
        .unwrap();
        assert!(complete_isometry(&spec)
            .unwrap()
            .approx_eq(&ComplexMatrix::identity(2), 1e-15));
    }

    #[test]
    fn completion_reproduces_minus_preimage() {
        let zero = q(&[1.0, 0.0]);
        let one = q(&[0.0, 1.0]);
        let plus = q(&[1.0, 1.0]);
        let minus = q(&[1.0, -1.0]);
        let spec = PartialIsometrySpec::new(vec![
            (zero.tensor(&zero), zero.tensor(&zero)),
            (one.tensor(&zero), one.tensor(&plus)),
        ])
        .unwrap();
        let u = complete_isometry(&spec).unwrap();
        let back = one.tensor(&one).evolve(&u.adjoint()).unwrap();
        assert!((fidelity_pure(&back, &one.tensor(&minus)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_specs_are_rejected() {
        let zero = q(&[1.0, 0.0]);
        let one = q(&[0.0, 1.0]);
        let plus = q(&[1.0, 1.0]);
        // orthogonal inputs mapped to overlapping outputs
        let err = PartialIsometrySpec::new(vec![(zero.clone(), zero.clone()), (one, plus.clone())]);
        assert!(matches!(err, Err(Error::InconsistentIsometry(_))));
        // non-orthogonal inputs
        let err =
            PartialIsometrySpec::new(vec![(zero.clone(), zero.clone()), (plus.clone(), plus)]);
        assert!(matches!(err, Err(Error::InconsistentIsometry(_))));
    }

    #[test]
    fn composition_applies_in_order() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let flip = channel_from_unitary(&x).unwrap();
        let seq = flip.then(&reset_channel()).unwrap();
        let out = seq.apply(&density_of(&q(&[1.0, 0.0]))).unwrap();
        assert!(out
            .matrix()
            .approx_eq(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0]), 1e-15));
    }
}
