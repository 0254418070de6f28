//! Initial diffeomorphisms built from Fourier modes, and named presets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::field::{gradient, MapField};
use crate::kinematics::svd2;
use crate::lattice::{Lattice, TorusPair};
use crate::{Error, Result, Vec2};

/// Grid minimum of `det Du` below which a map is not accepted as a
/// diffeomorphism.
pub const DIFFEO_TOL: f64 = 1e-10;

/// One displacement mode `amplitude · sin(2π k·ξ + phase)` in lattice
/// coordinates `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub k: [i64; 2],
    pub amplitude: Vec2,
    pub phase: f64,
}

impl ModeSpec {
    pub fn new(k: [i64; 2], amplitude: [f64; 2], phase: f64) -> Self {
        Self {
            k,
            amplitude: Vec2::new(amplitude[0], amplitude[1]),
            phase,
        }
    }

    fn eval(&self, xi: &Vec2) -> Vec2 {
        let arg = 2.0 * PI * (self.k[0] as f64 * xi[0] + self.k[1] as f64 * xi[1]) + self.phase;
        self.amplitude * arg.sin()
    }
}

/// `u = B x + Σ amplitude · sin(2π k·ξ + phase)`.
pub fn build_map(pair: TorusPair, modes: &[ModeSpec], n1: usize, n2: usize) -> Result<MapField> {
    MapField::from_lattice_fn(pair, n1, n2, |xi| {
        modes.iter().fold(Vec2::zeros(), |acc, m| acc + m.eval(&xi))
    })
}

/// Modes of `v = ∇φ` for the periodic potential
/// `φ = Σ c · cos(2π k·ξ + phase)`; `Du` is then symmetric whenever `B` is.
pub fn gradient_modes(domain: &Lattice, potential: &[([i64; 2], f64, f64)]) -> Vec<ModeSpec> {
    potential
        .iter()
        .map(|&(k, c, phase)| {
            let kc = domain.inverse().transpose() * Vec2::new(k[0] as f64, k[1] as f64);
            ModeSpec {
                k,
                amplitude: kc * (-2.0 * PI * c),
                phase,
            }
        })
        .collect()
}

/// Small random modes with `|k_i| ≤ kmax`, amplitudes uniform in
/// `[−amplitude, amplitude]` and uniform phases.
pub fn random_modes<R: Rng>(rng: &mut R, count: usize, kmax: i64, amplitude: f64) -> Vec<ModeSpec> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = [rng.gen_range(-kmax..=kmax), rng.gen_range(-kmax..=kmax)];
        if k == [0, 0] {
            continue;
        }
        out.push(ModeSpec::new(
            k,
            [
                rng.gen_range(-amplitude..=amplitude),
                rng.gen_range(-amplitude..=amplitude),
            ],
            rng.gen_range(0.0..2.0 * PI),
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffeoCheck {
    pub ok: bool,
    pub min_det: f64,
    pub min_lambda: f64,
}

/// Grid positivity of `det Du`, the discrete surrogate for being a
/// diffeomorphism within the degree-one class.
pub fn check_diffeomorphism(field: &MapField) -> DiffeoCheck {
    let du = gradient(field);
    let (mut min_det, mut min_lambda) = (f64::INFINITY, f64::INFINITY);
    for m in &du {
        min_det = min_det.min(m.determinant());
        min_lambda = min_lambda.min(svd2(m).lambda1);
    }
    DiffeoCheck {
        ok: min_det > DIFFEO_TOL,
        min_det,
        min_lambda,
    }
}

/// Reproducible initial maps for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `B = I` with a few smooth modes.
    IdentityPerturbed,
    /// `B = [[1, 1], [0, 1]]` with smooth modes.
    Shear,
    /// `B = diag(2, 1)` onto the target lattice `2ℤ × ℤ`.
    Anisotropic,
    /// `B = I` with modes bringing `min λ1` down to about 0.05.
    LargeGradient,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::IdentityPerturbed,
        Preset::Shear,
        Preset::Anisotropic,
        Preset::LargeGradient,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::IdentityPerturbed => "identity-perturbed",
            Preset::Shear => "shear",
            Preset::Anisotropic => "anisotropic",
            Preset::LargeGradient => "large-gradient",
        }
    }

    pub fn pair(&self) -> TorusPair {
        let z = Lattice::unit();
        let built = match self {
            Preset::IdentityPerturbed | Preset::LargeGradient => {
                TorusPair::from_class(z, z, [[1, 0], [0, 1]])
            }
            Preset::Shear => TorusPair::from_class(z, z, [[1, 1], [0, 1]]),
            Preset::Anisotropic => {
                let target = Lattice::from_column_major([2.0, 0.0, 0.0, 1.0])
                    .expect("positive diagonal basis");
                TorusPair::from_class(z, target, [[1, 0], [0, 1]])
            }
        };
        built.expect("preset classes are valid")
    }

    pub fn modes(&self) -> Vec<ModeSpec> {
        match self {
            Preset::IdentityPerturbed => vec![
                ModeSpec::new([1, 0], [0.05, 0.02], 0.0),
                ModeSpec::new([0, 1], [0.03, -0.04], 0.3),
                ModeSpec::new([1, 1], [0.01, 0.01], 1.0),
            ],
            Preset::Shear => vec![
                ModeSpec::new([1, 0], [0.03, 0.02], 0.0),
                ModeSpec::new([0, 1], [-0.02, 0.03], 0.5),
                ModeSpec::new([1, -1], [0.01, -0.01], 1.3),
            ],
            Preset::Anisotropic => vec![
                ModeSpec::new([1, 0], [0.06, 0.02], 0.0),
                ModeSpec::new([0, 1], [0.03, 0.03], 0.7),
            ],
            Preset::LargeGradient => vec![
                ModeSpec::new([1, 0], [0.95 / (2.0 * PI), 0.0], 0.0),
                ModeSpec::new([0, 1], [0.0, 0.5 / (2.0 * PI)], 0.0),
            ],
        }
    }

    pub fn build(&self, n: usize) -> Result<MapField> {
        build_map(self.pair(), &self.modes(), n, n)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config {
                line: 0,
                msg: format!("unknown preset `{s}`"),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_modes_give_affine_map() {
        let f = build_map(Preset::Shear.pair(), &[], 8, 8).unwrap();
        assert!(f.v.iter().all(|v| *v == Vec2::zeros()));
    }

    #[test]
    fn single_mode_threshold() {
        let pair = TorusPair::unit_identity();
        let ok = build_map(pair, &[ModeSpec::new([1, 0], [0.9 / (2.0 * PI), 0.0], 0.0)], 32, 32).unwrap();
        assert!(check_diffeomorphism(&ok).ok);
        let bad = build_map(pair, &[ModeSpec::new([1, 0], [1.5 / (2.0 * PI), 0.0], 0.0)], 32, 32).unwrap();
        let check = check_diffeomorphism(&bad);
        assert!(!check.ok);
        assert!(check.min_det < 0.0);
    }

    #[test]
    fn identity_check() {
        let f = MapField::affine(TorusPair::unit_identity(), 8, 8).unwrap();
        let c = check_diffeomorphism(&f);
        assert!(c.ok);
        assert_eq!(c.min_det, 1.0);
        assert_eq!(c.min_lambda, 1.0);
    }

    #[test]
    fn determinant_two_class() {
        let f = build_map(
            Preset::Anisotropic.pair(),
            &[ModeSpec::new([1, 0], [1e-4, 0.0], 0.0)],
            16,
            16,
        )
        .unwrap();
        let c = check_diffeomorphism(&f);
        assert!((c.min_det - 2.0).abs() < 2e-3);
    }

    #[test]
    fn presets_are_diffeomorphisms() {
        for p in Preset::ALL {
            let c = check_diffeomorphism(&p.build(64).unwrap());
            assert!(c.ok, "{p}");
        }
        let lg = check_diffeomorphism(&Preset::LargeGradient.build(64).unwrap());
        assert!((lg.min_lambda - 0.05).abs() < 0.01, "{}", lg.min_lambda);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn random_small_modes_stay_diffeomorphic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let modes = random_modes(&mut rng, 4, 2, 0.01);
            let f = build_map(TorusPair::unit_identity(), &modes, 32, 32).unwrap();
            assert!(check_diffeomorphism(&f).ok);
        }
    }

    #[test]
    fn gradient_modes_give_symmetric_jacobian() {
        let modes = gradient_modes(&Lattice::unit(), &[([1, 1], 0.01, 0.2), ([1, -1], 0.005, 0.0)]);
        let f = build_map(TorusPair::unit_identity(), &modes, 32, 32).unwrap();
        for du in gradient(&f) {
            assert!((du[(0, 1)] - du[(1, 0)]).abs() < 1e-14);
        }
    }

    #[test]
    fn amplitude_scaling_is_linear() {
        let base = Preset::IdentityPerturbed.modes();
        let scaled: Vec<ModeSpec> = base
            .iter()
            .map(|m| ModeSpec { amplitude: m.amplitude * 2.5, ..*m })
            .collect();
        let a = build_map(TorusPair::unit_identity(), &base, 16, 16).unwrap();
        let b = build_map(TorusPair::unit_identity(), &scaled, 16, 16).unwrap();
        for (x, y) in a.v.iter().zip(&b.v) {
            assert!((x * 2.5 - y).norm() < 1e-15);
        }
    }

    #[test]
    fn det_positive_below_threshold_for_single_mode_family() {
        let pair = TorusPair::unit_identity();
        for s in [0.1, 0.5, 0.9, 0.99] {
            let f = build_map(pair, &[ModeSpec::new([1, 0], [s / (2.0 * PI), 0.0], 0.0)], 32, 32).unwrap();
            assert!(check_diffeomorphism(&f).ok, "s = {s}");
        }
    }
}
