//! Uniform linear arrays: geometry, steering vectors and DFT codebooks.
//!
//! Angles are physical azimuths measured from broadside. Element `n` of an
//! array with spacing `d` (in carrier wavelengths) sees the phase
//! `2*pi*d*n*sin(angle)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Half-wavelength element spacing.
pub const DEFAULT_SPACING: f64 = 0.5;

/// A uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    num_elements: usize,
    element_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(num_elements: usize, element_spacing: f64) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidArgument(
                "array must have at least one element".into(),
            ));
        }
        if !(element_spacing.is_finite() && element_spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "element spacing must be positive and finite, got {element_spacing}"
            )));
        }
        Ok(Self {
            num_elements,
            element_spacing,
        })
    }

    /// Half-wavelength ULA with `num_elements` elements.
    pub fn ula(num_elements: usize) -> Result<Self> {
        Self::new(num_elements, DEFAULT_SPACING)
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn element_spacing(&self) -> f64 {
        self.element_spacing
    }

    /// Unnormalized array response toward `angle` (radians); every entry has
    /// unit magnitude.
    ///
    /// Any finite angle is accepted. Angles outside `[-pi/2, pi/2]` alias onto
    /// their mirror image about endfire, since only `sin(angle)` enters.
    pub fn steering_vector(&self, angle: f64) -> Result<DVector<C64>> {
        if !angle.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "steering angle must be finite, got {angle}"
            )));
        }
        let step = 2.0 * PI * self.element_spacing * angle.sin();
        Ok(DVector::from_iterator(
            self.num_elements,
            (0..self.num_elements).map(|n| C64::from_polar(1.0, step * n as f64)),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodebookKind {
    Dft,
}

/// An ordered set of unit-norm beams for one array.
#[derive(Debug, Clone)]
pub struct Codebook {
    beams: Vec<DVector<C64>>,
    kind: CodebookKind,
}

impl Codebook {
    pub fn beams(&self) -> &[DVector<C64>] {
        &self.beams
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn num_elements(&self) -> usize {
        self.beams.first().map_or(0, |b| b.len())
    }

    /// Beams stacked as the columns of an `N x len` matrix.
    pub fn as_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_columns(&self.beams)
    }
}

/// Critically sampled DFT codebook: `N` beams for an `N`-element array, beam
/// `m` having entries `exp(j*2*pi*n*m/N) / sqrt(N)`.
pub fn dft_codebook(geometry: &ArrayGeometry) -> Codebook {
    let n = geometry.num_elements();
    let scale = 1.0 / (n as f64).sqrt();
    let beams = (0..n)
        .map(|m| {
            DVector::from_iterator(
                n,
                (0..n).map(|k| {
                    // reduce the product first so large arrays keep full phase precision
                    let cycles = ((k * m) % n) as f64 / n as f64;
                    C64::from_polar(scale, 2.0 * PI * cycles)
                }),
            )
        })
        .collect();
    Codebook {
        beams,
        kind: CodebookKind::Dft,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn geometry_rejects_bad_parameters() {
        assert!(ArrayGeometry::new(0, 0.5).is_err());
        assert!(ArrayGeometry::new(4, 0.0).is_err());
        assert!(ArrayGeometry::new(4, -1.0).is_err());
        assert!(ArrayGeometry::new(4, f64::NAN).is_err());
        assert_eq!(ArrayGeometry::ula(4).unwrap().element_spacing(), 0.5);
    }

    #[test]
    fn broadside_is_all_ones() {
        let v = ArrayGeometry::ula(4).unwrap().steering_vector(0.0).unwrap();
        for x in v.iter() {
            assert!(close(*x, C64::new(1.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn single_element_is_one() {
        let g = ArrayGeometry::ula(1).unwrap();
        for angle in [-1.2, 0.0, 0.3, PI / 2.0] {
            let v = g.steering_vector(angle).unwrap();
            assert_eq!(v.len(), 1);
            assert!(close(v[0], C64::new(1.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn thirty_degrees_steps_by_quarter_turns() {
        let v = ArrayGeometry::ula(4)
            .unwrap()
            .steering_vector(PI / 6.0)
            .unwrap();
        let expected = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, -1.0),
        ];
        for (x, e) in v.iter().zip(expected) {
            assert!(close(*x, e, 1e-12), "{x} vs {e}");
        }
    }

    #[test]
    fn non_finite_angle_is_rejected() {
        let g = ArrayGeometry::ula(4).unwrap();
        assert!(matches!(
            g.steering_vector(f64::NAN),
            Err(Error::InvalidArgument(_))
        ));
        assert!(g.steering_vector(f64::INFINITY).is_err());
    }

    #[test]
    fn small_dft_codebooks() {
        let one = dft_codebook(&ArrayGeometry::ula(1).unwrap());
        assert_eq!(one.len(), 1);
        assert!(close(one.beams()[0][0], C64::new(1.0, 0.0), 1e-15));

        let two = dft_codebook(&ArrayGeometry::ula(2).unwrap());
        let h = 1.0 / 2f64.sqrt();
        assert!(close(two.beams()[0][0], C64::new(h, 0.0), 1e-15));
        assert!(close(two.beams()[0][1], C64::new(h, 0.0), 1e-15));
        assert!(close(two.beams()[1][0], C64::new(h, 0.0), 1e-15));
        assert!(close(two.beams()[1][1], C64::new(-h, 0.0), 1e-15));
        assert_eq!(two.kind(), CodebookKind::Dft);
    }

    #[test]
    fn dft_32_gram_is_identity() {
        let cb = dft_codebook(&ArrayGeometry::ula(32).unwrap()).as_matrix();
        let gram = cb.adjoint() * &cb;
        let err = (gram - DMatrix::<C64>::identity(32, 32)).map(|x| x.norm()).max();
        assert!(err < 1e-10, "gram error {err}");
    }

    proptest! {
        #[test]
        fn steering_is_unit_modulus_and_conjugate_symmetric(
            n in 1usize..48,
            spacing in 0.1f64..2.0,
            angle in -PI / 2.0..PI / 2.0,
        ) {
            let g = ArrayGeometry::new(n, spacing).unwrap();
            let pos = g.steering_vector(angle).unwrap();
            let neg = g.steering_vector(-angle).unwrap();
            for (p, q) in pos.iter().zip(neg.iter()) {
                prop_assert!((p.norm() - 1.0).abs() < 1e-12);
                prop_assert!((p.conj() - q).norm() < 1e-12);
            }
        }

        #[test]
        fn dft_beams_are_unit_norm_with_equal_magnitudes(n in 1usize..40) {
            let cb = dft_codebook(&ArrayGeometry::ula(n).unwrap());
            prop_assert_eq!(cb.len(), n);
            let mag = 1.0 / (n as f64).sqrt();
            for b in cb.beams() {
                prop_assert!((b.norm() - 1.0).abs() < 1e-12);
                for x in b.iter() {
                    prop_assert!((x.norm() - mag).abs() < 1e-12);
                }
            }
        }
    }
}
