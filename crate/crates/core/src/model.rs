//! Closed-loop plant: gains, state, system matrices and linear stability.

use nalgebra::{Matrix3, RowVector3, Vector3};
use num_complex::Complex64;

use crate::error::{check_finite, Error, Result};

/// PID feedback gains of the closed loop.
///
/// `kd` is in 1/s, `kp` in 1/s², `ki` in 1/s³ (unity mass). `kd = 0` and
/// `ki = 0` are admitted; they select the undamped and PD-only analysis modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub kd: f64,
    pub kp: f64,
    pub ki: f64,
}

impl Gains {
    pub fn new(kd: f64, kp: f64, ki: f64) -> Result<Self> {
        let gains = Self { kd, kp, ki };
        gains.validate()?;
        Ok(gains)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("kd", self.kd)?;
        check_finite("kp", self.kp)?;
        check_finite("ki", self.ki)?;
        if self.kd < 0.0 {
            return Err(Error::InvalidParameter {
                name: "kd",
                value: self.kd,
                reason: "must be non-negative",
            });
        }
        if self.kp <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kp",
                value: self.kp,
                reason: "must be positive",
            });
        }
        if self.ki < 0.0 {
            return Err(Error::InvalidParameter {
                name: "ki",
                value: self.ki,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    /// Multiplies all three gains by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            kd: self.kd * c,
            kp: self.kp * c,
            ki: self.ki * c,
        }
    }
}

/// Coulomb friction level `fc` (force per unit mass). Zero means frictionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionParams {
    pub fc: f64,
}

impl FrictionParams {
    pub fn new(fc: f64) -> Result<Self> {
        let friction = Self { fc };
        friction.validate()?;
        Ok(friction)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("fc", self.fc)?;
        if self.fc < 0.0 {
            return Err(Error::InvalidParameter {
                name: "fc",
                value: self.fc,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }
}

/// Closed-loop state: integral error, output error and rate error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl State {
    pub const ORIGIN: State = State {
        x1: 0.0,
        x2: 0.0,
        x3: 0.0,
    };

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x1, self.x2, self.x3)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.x1 - other.x1)
            .abs()
            .max((self.x2 - other.x2).abs())
            .max((self.x3 - other.x3).abs())
    }
}

/// `x' = A x + B u`, `y = C x` with the companion-form `A` of the PID loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub c: RowVector3<f64>,
    pub fc: f64,
    gains: Gains,
    spectral_radius: f64,
}

impl SystemMatrices {
    pub fn gains(&self) -> Gains {
        self.gains
    }

    pub fn kd(&self) -> f64 {
        -self.a[(2, 2)]
    }

    pub fn kp(&self) -> f64 {
        -self.a[(2, 1)]
    }

    pub fn ki(&self) -> f64 {
        -self.a[(2, 0)]
    }

    /// Largest eigenvalue magnitude of `A`; sets the event-search time scale.
    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// Net spring force `ki x1 + kp x2 + kd x3`, i.e. `-C A x`.
    pub fn restoring_force(&self, state: &State) -> f64 {
        self.ki() * state.x1 + self.kp() * state.x2 + self.kd() * state.x3
    }

    /// Right-hand side `A x + B u` for a constant relay value `u`.
    pub fn derivative(&self, state: &State, u: f64) -> State {
        State::new(
            state.x2,
            state.x3,
            -self.restoring_force(state) + self.fc * u,
        )
    }
}

/// Assembles `A`, `B`, `C` from the gains and the friction level.
pub fn build_system(gains: Gains, friction: FrictionParams) -> Result<SystemMatrices> {
    gains.validate()?;
    friction.validate()?;
    #[rustfmt::skip]
    let a = Matrix3::new(
        0.0, 1.0, 0.0,
        0.0, 0.0, 1.0,
        -gains.ki, -gains.kp, -gains.kd,
    );
    let roots = characteristic_roots(gains.kd, gains.kp, gains.ki);
    let spectral_radius = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    Ok(SystemMatrices {
        a,
        b: Vector3::new(0.0, 0.0, friction.fc),
        c: RowVector3::new(0.0, 0.0, 1.0),
        fc: friction.fc,
        gains,
        spectral_radius,
    })
}

/// Routh-Hurwitz test for `s³ + kd s² + kp s + ki`: all gains positive and
/// `kd kp > ki` (strict).
pub fn is_linearly_stable(gains: Gains) -> bool {
    gains.kd > 0.0 && gains.kp > 0.0 && gains.ki > 0.0 && gains.kd * gains.kp > gains.ki
}

/// Eigenvalues of the slip-phase matrix `A`, sorted by real then imaginary part.
pub fn eigenvalues(system: &SystemMatrices) -> [Complex64; 3] {
    characteristic_roots(system.kd(), system.kp(), system.ki())
}

fn cubic(kd: f64, kp: f64, ki: f64, s: f64) -> (f64, f64) {
    let p = ((s + kd) * s + kp) * s + ki;
    let dp = (3.0 * s + 2.0 * kd) * s + kp;
    (p, dp)
}

/// Newton polishing of a real root; keeps the iterate with the smallest residual.
fn polish_real(kd: f64, kp: f64, ki: f64, guess: f64) -> f64 {
    let mut best = guess;
    let mut best_res = cubic(kd, kp, ki, guess).0.abs();
    let mut s = guess;
    for _ in 0..100 {
        let (p, dp) = cubic(kd, kp, ki, s);
        if p == 0.0 || dp == 0.0 {
            break;
        }
        let next = s - p / dp;
        if !next.is_finite() || next == s {
            break;
        }
        s = next;
        let res = cubic(kd, kp, ki, s).0.abs();
        if res < best_res {
            best = s;
            best_res = res;
        } else if res > 4.0 * best_res {
            break;
        }
    }
    best
}

/// Real-root estimates from the trigonometric / Cardano form of the cubic.
fn real_root_guesses(kd: f64, kp: f64, ki: f64) -> Vec<f64> {
    let shift = kd / 3.0;
    let p = kp - kd * kd / 3.0;
    let q = 2.0 * kd.powi(3) / 27.0 - kd * kp / 3.0 + ki;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if p == 0.0 {
        return vec![(-q).cbrt() - shift];
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        let y = (-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt();
        vec![y - shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    }
}

/// Roots of `s³ + kd s² + kp s + ki`.
///
/// One real root is located and polished, the cubic is deflated to a
/// quadratic (choosing the numerically stabler constant term), and the pair is
/// taken in closed form. The deflation keeps the root sum equal to `-kd`.
pub(crate) fn characteristic_roots(kd: f64, kp: f64, ki: f64) -> [Complex64; 3] {
    let root = real_root_guesses(kd, kp, ki)
        .into_iter()
        .map(|g| polish_real(kd, kp, ki, g))
        .max_by(|a, b| {
            let da = cubic(kd, kp, ki, *a).1.abs();
            let db = cubic(kd, kp, ki, *b).1.abs();
            da.total_cmp(&db)
        })
        .unwrap_or(0.0);

    let q1 = kd + root;
    let forward = kp + root * q1;
    let q0 = if root != 0.0 && (ki / (root * root)).abs() < (kd + 2.0 * root).abs() {
        -ki / root
    } else {
        forward
    };

    let half = q1 / 2.0;
    let mut disc = half * half - q0;
    if disc.abs() <= 64.0 * f64::EPSILON * (half * half + q0.abs()) {
        disc = 0.0;
    }
    let (r2, r3) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let big = -(half + half.signum() * sq);
        if big == 0.0 {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (Complex64::new(big, 0.0), Complex64::new(q0 / big, 0.0))
        }
    } else {
        let im = (-disc).sqrt();
        (Complex64::new(-half, im), Complex64::new(-half, -im))
    };

    let mut roots = [Complex64::new(root, 0.0), r2, r3];
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(kd: f64, kp: f64, ki: f64, s: Complex64) -> f64 {
        (((s + kd) * s + kp) * s + ki).norm()
    }

    #[test]
    fn example2_matrices() {
        let sys = build_system(
            Gains::new(20.0, 100.0, 1000.0).unwrap(),
            FrictionParams::new(50.0).unwrap(),
        )
        .unwrap();
        assert_eq!(sys.a.row(2), RowVector3::new(-1000.0, -100.0, -20.0));
        assert_eq!(sys.b, Vector3::new(0.0, 0.0, 50.0));
        assert_eq!(sys.c, RowVector3::new(0.0, 0.0, 1.0));
        assert_eq!(sys.a.row(0), RowVector3::new(0.0, 1.0, 0.0));
        assert_eq!(sys.a.row(1), RowVector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn zero_gain_rows() {
        let sys = build_system(
            Gains::new(2.0, 1.0, 0.0).unwrap(),
            FrictionParams::new(0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(sys.a.row(2), RowVector3::new(0.0, -1.0, -2.0));
        assert_eq!(sys.b, Vector3::zeros());
        assert_eq!(sys.a.determinant(), 0.0);
    }

    #[test]
    fn example1_matrices() {
        let sys = build_system(
            Gains::new(0.0, 100.0, 1.0).unwrap(),
            FrictionParams::new(1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(sys.a.row(2), RowVector3::new(-1.0, -100.0, 0.0));
        assert_eq!(sys.b, Vector3::new(0.0, 0.0, 1.0));
        assert!((sys.a.determinant() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Gains::new(-1.0, 1.0, 1.0).is_err());
        assert!(Gains::new(1.0, 0.0, 1.0).is_err());
        assert!(Gains::new(1.0, 1.0, -0.1).is_err());
        assert!(Gains::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(FrictionParams::new(-1.0).is_err());
        assert!(FrictionParams::new(f64::INFINITY).is_err());
        let bad = Gains {
            kd: 1.0,
            kp: -3.0,
            ki: 0.0,
        };
        assert!(build_system(bad, FrictionParams { fc: 1.0 }).is_err());
    }

    #[test]
    fn routh_hurwitz() {
        assert!(is_linearly_stable(Gains::new(20.0, 100.0, 1000.0).unwrap()));
        assert!(!is_linearly_stable(Gains::new(0.0, 100.0, 1.0).unwrap()));
        assert!(!is_linearly_stable(Gains::new(1.0, 1.0, 1.0).unwrap()));
        assert!(!is_linearly_stable(Gains::new(2.0, 1.0, 0.0).unwrap()));
    }

    #[test]
    fn example4_double_pole() {
        let r = characteristic_roots(56.0, 1040.0, 6400.0);
        let expect = [-20.0, -20.0, -16.0];
        for (root, e) in r.iter().zip(expect) {
            assert!((root.re - e).abs() < 1e-6, "{r:?}");
            assert!(root.im.abs() < 1e-6);
            assert!(residual(56.0, 1040.0, 6400.0, *root) <= 1e-9 * root.norm().powi(3));
        }
    }

    #[test]
    fn pd_only_factorization() {
        let r = characteristic_roots(2.0, 1.0, 0.0);
        assert_eq!(r[2], Complex64::new(0.0, 0.0));
        assert!((r[0].re + 1.0).abs() < 1e-7 && (r[1].re + 1.0).abs() < 1e-7);
    }

    #[test]
    fn example1_unstable_pair() {
        let r = characteristic_roots(0.0, 100.0, 1.0);
        let real = r.iter().find(|z| z.im == 0.0).unwrap();
        assert!((real.re + 0.01).abs() < 1e-3);
        let pair: Vec<_> = r.iter().filter(|z| z.im != 0.0).collect();
        assert_eq!(pair.len(), 2);
        for z in pair {
            assert!(z.re > 0.0);
            assert!((z.im.abs() - 10.0).abs() < 1e-2);
            // trace identity pins the pair's real part to -real/2
            assert!((z.re + real.re / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stable_implies_left_half_plane() {
        for &(kd, kp, ki) in &[
            (20.0, 100.0, 1000.0),
            (10.0, 1040.0, 8000.0),
            (56.0, 1040.0, 6400.0),
        ] {
            let g = Gains::new(kd, kp, ki).unwrap();
            assert!(is_linearly_stable(g));
            assert!(characteristic_roots(kd, kp, ki).iter().all(|z| z.re < 0.0));
        }
    }
}
