//! Closed-form one-dimensional debonding.
//!
//! On `(0, L)` with the drive applied at `x = 0`, every admissible state is a
//! tent `w (1 - x/l)^+` described by its front `l`. This module builds exact
//! front trajectories for constant toughness and for the flat landscape,
//! checks global stability and energy balance in closed form, and constructs
//! the spiky drive whose power fails to be integrable. Everything here is
//! independent of the grid solver and is used as its reference.

use serde::Serialize;

use crate::domain::TimeSeries;
use crate::error::OneDimError;

/// Displacement of the tent state at `x`.
pub fn front_field(front: f64, length: f64, w: f64, x: f64) -> f64 {
    if front <= 0.0 {
        0.0
    } else if front >= length {
        w
    } else {
        w * (1.0 - x / front).max(0.0)
    }
}

/// Elastic energy of the tent state. A fully debonded membrane carries no
/// strain, so the energy drops from `w^2/(2L)` to zero at the far end.
pub fn front_energy(front: f64, length: f64, w: f64) -> f64 {
    if front <= 0.0 || front >= length {
        0.0
    } else {
        0.5 * w * w / front
    }
}

/// Toughness profiles with closed-form primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KappaProfile {
    Constant { value: f64 },
    /// `w^2 / (2 x^2)` on `[start, alpha]`, then `w^2 / (2 alpha^2)`.
    Flat { w: f64, start: f64, alpha: f64 },
}

impl KappaProfile {
    pub fn validate(&self) -> Result<(), OneDimError> {
        match *self {
            KappaProfile::Constant { value } if !(value > 0.0 && value.is_finite()) => {
                Err(OneDimError::InvalidParameter(format!("toughness must be positive, got {value}")))
            }
            KappaProfile::Flat { w, start, alpha } if !(w > 0.0 && start > 0.0 && alpha > start) => {
                Err(OneDimError::InvalidParameter(format!(
                    "flat profile needs w > 0 and 0 < start < alpha, got w={w}, start={start}, alpha={alpha}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            KappaProfile::Constant { value } => value,
            KappaProfile::Flat { w, start, alpha } => {
                let y = x.clamp(start, alpha);
                0.5 * w * w / (y * y)
            }
        }
    }

    /// Oriented integral `int_a^b kappa`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b == a {
            return 0.0;
        }
        if b < a {
            return -self.integral(b, a);
        }
        match *self {
            KappaProfile::Constant { value } => value * (b - a),
            KappaProfile::Flat { w, start, alpha } => {
                let c = 0.5 * w * w;
                let mut total = 0.0;
                let below = (a, b.min(start));
                if below.1 > below.0 {
                    total += c / (start * start) * (below.1 - below.0);
                }
                let mid = (a.max(start), b.min(alpha));
                if mid.1 > mid.0 {
                    total += c * (1.0 / mid.0 - 1.0 / mid.1);
                }
                let above = (a.max(alpha), b);
                if above.1 > above.0 {
                    total += c / (alpha * alpha) * (above.1 - above.0);
                }
                total
            }
        }
    }

    /// Points where the profile changes formula.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            KappaProfile::Constant { .. } => Vec::new(),
            KappaProfile::Flat { start, alpha, .. } => vec![start, alpha],
        }
    }
}

/// Stretch of a trajectory on which the front is affine in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontPiece {
    pub t0: f64,
    pub t1: f64,
    pub front0: f64,
    pub front1: f64,
}

impl FrontPiece {
    pub fn at(&self, t: f64) -> f64 {
        if self.t1 <= self.t0 {
            return self.front1;
        }
        let s = ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0);
        self.front0 + s * (self.front1 - self.front0)
    }
}

/// Non-decreasing front `t -> l(t)` with its drive and toughness.
///
/// Pieces are contiguous in time and refined at every drive breakpoint, so
/// the drive is affine on each piece. A jump sits between two pieces; the
/// front is right-continuous there.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrajectory {
    pieces: Vec<FrontPiece>,
    jumps: Vec<f64>,
    drive: TimeSeries,
    kappa: KappaProfile,
    length: f64,
}

const JUMP_EPS: f64 = 1e-12;

impl FrontTrajectory {
    /// Validates monotonicity, the compatibility condition (a vanishing front
    /// requires a vanishing drive) and coverage of the drive's time span.
    pub fn from_pieces(
        drive: TimeSeries,
        kappa: KappaProfile,
        length: f64,
        pieces: Vec<FrontPiece>,
    ) -> Result<Self, OneDimError> {
        kappa.validate()?;
        if !(length > 0.0) {
            return Err(OneDimError::InvalidParameter(format!("length must be positive, got {length}")));
        }
        let Some(first) = pieces.first() else {
            return Err(OneDimError::InvalidParameter("trajectory has no pieces".into()));
        };
        let last = pieces.last().unwrap();
        if first.t0 != drive.start() || last.t1 != drive.end() {
            return Err(OneDimError::InvalidParameter(format!(
                "pieces cover [{}, {}] but the drive spans [{}, {}]",
                first.t0,
                last.t1,
                drive.start(),
                drive.end()
            )));
        }
        let mut jumps = Vec::new();
        for (k, p) in pieces.iter().enumerate() {
            if p.t1 < p.t0 || p.front1 < p.front0 {
                return Err(OneDimError::NonMonotone(format!("piece {k} runs backwards")));
            }
            if p.front0 < 0.0 || p.front1 > length {
                return Err(OneDimError::InvalidParameter(format!("piece {k} leaves [0, {length}]")));
            }
            if k > 0 {
                let prev = &pieces[k - 1];
                if prev.t1 != p.t0 {
                    return Err(OneDimError::InvalidParameter(format!("gap before piece {k}")));
                }
                if p.front0 < prev.front1 {
                    return Err(OneDimError::NonMonotone(format!("front recedes at t = {}", p.t0)));
                }
                if p.front0 > prev.front1 + JUMP_EPS {
                    jumps.push(p.t0);
                }
            }
        }
        for p in &pieces {
            for (t, l) in [(p.t0, p.front0), (p.t1, p.front1)] {
                if l <= 0.0 && drive.value(t) != 0.0 {
                    return Err(OneDimError::InvalidParameter(format!(
                        "front vanishes at t = {t} while the drive is {}",
                        drive.value(t)
                    )));
                }
            }
        }
        let pieces = refine(&pieces, &drive);
        Ok(FrontTrajectory { pieces, jumps, drive, kappa, length })
    }

    pub fn pieces(&self) -> &[FrontPiece] {
        &self.pieces
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn drive(&self) -> &TimeSeries {
        &self.drive
    }

    pub fn kappa(&self) -> &KappaProfile {
        &self.kappa
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn initial_front(&self) -> f64 {
        self.pieces[0].front0
    }

    /// Right-continuous front at `t`.
    pub fn front_at(&self, t: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.t1 <= t);
        match self.pieces.get(k) {
            Some(p) => p.at(t),
            None => self.pieces.last().unwrap().front1,
        }
    }

    /// Front just before `t` (differs from [`front_at`](Self::front_at) only at jumps).
    pub fn front_before(&self, t: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.t1 < t);
        match self.pieces.get(k) {
            Some(p) if p.t0 < t => p.at(t),
            _ if k > 0 => self.pieces[k - 1].front1,
            _ => self.pieces[0].front0,
        }
    }

    pub fn sample(&self, times: &[f64]) -> Vec<f64> {
        times.iter().map(|&t| self.front_at(t)).collect()
    }
}

/// Splits pieces at drive breakpoints and drops zero-length pieces that do
/// not carry a jump.
fn refine(pieces: &[FrontPiece], drive: &TimeSeries) -> Vec<FrontPiece> {
    let mut out: Vec<FrontPiece> = Vec::with_capacity(pieces.len() + drive.times().len());
    for p in pieces {
        let mut cuts: Vec<f64> = vec![p.t0];
        cuts.extend(drive.breakpoints_between(p.t0, p.t1));
        cuts.push(p.t1);
        for c in cuts.windows(2) {
            if c[1] > c[0] || p.t1 == p.t0 {
                out.push(FrontPiece { t0: c[0], t1: c[1], front0: p.at(c[0]), front1: p.at(c[1]) });
            }
        }
    }
    out
}

/// `int ẇ w / l dt` over one piece with `w` and `l` affine.
fn piece_work(w0: f64, w1: f64, l0: f64, l1: f64, h: f64) -> f64 {
    if h <= 0.0 || w1 == w0 {
        return 0.0;
    }
    let a = (w1 - w0) / h;
    let b = (l1 - l0) / h;
    let x = b * h / l0;
    if x.abs() < 0.1 {
        // Geometric series of 1/(l0 + b s); converges to machine precision.
        let mut total = 0.0;
        let mut coef = 1.0;
        let mut hp = h;
        for k in 0..60 {
            let kf = k as f64;
            let term = coef * (w0 * hp / (kf + 1.0) + a * hp * h / (kf + 2.0));
            total += term;
            if term.abs() <= 1e-18 * total.abs() {
                break;
            }
            coef *= -b / l0;
            hp *= h;
        }
        a * total / l0
    } else {
        a * (a / b * h + (w0 - a * l0 / b) / b * (l1 / l0).ln())
    }
}

/// Power of the drive on a piece: zero once the membrane is fully debonded.
fn work_on(piece: &FrontPiece, drive: &TimeSeries, length: f64) -> f64 {
    if piece.front0 >= length || piece.front1 <= 0.0 {
        return 0.0;
    }
    let (w0, w1) = (drive.value(piece.t0), drive.value(piece.t1));
    piece_work(w0, w1, piece.front0, piece.front1.min(length), piece.t1 - piece.t0)
}

/// Global stability margins of a single front.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GsMarginReport {
    /// `min_rho` of the energy-plus-dissipation gain of moving to `rho`.
    pub worst_margin: f64,
    pub worst_rho: f64,
    /// Gain of full debonding.
    pub full_debond_margin: f64,
    /// `kappa(l+) - w^2/(2 l^2)`: the infinitesimal-growth limit of the scan.
    pub onset_margin: f64,
    pub scanned: usize,
    pub tolerance: f64,
    pub passed: bool,
}

const RHO_POINTS: usize = 1000;

/// Checks `w^2/(2l) <= w^2/(2 rho) + int_l^rho kappa` over a scan of `(l, L)`,
/// full debonding and the onset limit `rho -> l+`.
pub fn check_gs_ell(front: f64, w: f64, kappa: &KappaProfile, length: f64) -> GsMarginReport {
    let scale = 0.5 * w * w / front.max(f64::MIN_POSITIVE);
    let tolerance = 1e-12 * scale.max(1.0);
    if front >= length || w == 0.0 {
        return GsMarginReport {
            worst_margin: 0.0,
            worst_rho: length,
            full_debond_margin: 0.0,
            onset_margin: 0.0,
            scanned: 0,
            tolerance,
            passed: front > 0.0 || w == 0.0,
        };
    }
    if front <= 0.0 {
        return GsMarginReport {
            worst_margin: f64::NEG_INFINITY,
            worst_rho: 0.0,
            full_debond_margin: f64::NEG_INFINITY,
            onset_margin: f64::NEG_INFINITY,
            scanned: 0,
            tolerance,
            passed: false,
        };
    }
    let here = front_energy(front, length, w);
    let mut rhos: Vec<f64> = (1..RHO_POINTS).map(|k| front + (length - front) * k as f64 / RHO_POINTS as f64).collect();
    rhos.extend(kappa.breakpoints().into_iter().filter(|&b| b > front && b < length));
    let mut worst_margin = f64::INFINITY;
    let mut worst_rho = length;
    for &rho in &rhos {
        let m = 0.5 * w * w / rho + kappa.integral(front, rho) - here;
        if m < worst_margin {
            worst_margin = m;
            worst_rho = rho;
        }
    }
    let full_debond_margin = kappa.integral(front, length) - here;
    let onset_margin = kappa.value(front) - 0.5 * w * w / (front * front);
    let onset_tol = 1e-12 * (0.5 * w * w / (front * front)).max(1.0);
    GsMarginReport {
        passed: worst_margin >= -tolerance && full_debond_margin >= -tolerance && onset_margin >= -onset_tol,
        worst_margin: worst_margin.min(full_debond_margin),
        worst_rho: if full_debond_margin < worst_margin { length } else { worst_rho },
        full_debond_margin,
        onset_margin,
        scanned: rhos.len() + 1,
        tolerance,
    }
}

/// One evaluation of the energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EbSample {
    pub t: f64,
    pub front: f64,
    pub elastic: f64,
    pub dissipated: f64,
    pub work: f64,
    pub residual: f64,
}

/// Energy balance at both ends of every piece, so jumps appear as a pair of
/// samples at the same time.
pub fn check_eb_ell(trajectory: &FrontTrajectory) -> Vec<EbSample> {
    let drive = &trajectory.drive;
    let length = trajectory.length;
    let l0 = trajectory.initial_front();
    let e0 = front_energy(l0, length, drive.value(drive.start()));
    let sample = |t: f64, front: f64, work: f64| {
        let elastic = front_energy(front, length, drive.value(t));
        let dissipated = trajectory.kappa.integral(l0, front);
        EbSample { t, front, elastic, dissipated, work, residual: elastic + dissipated - e0 - work }
    };
    let mut out = Vec::with_capacity(2 * trajectory.pieces.len());
    let mut work = 0.0;
    for p in &trajectory.pieces {
        out.push(sample(p.t0, p.front0, work));
        work += work_on(p, drive, length);
        out.push(sample(p.t1, p.front1, work));
    }
    out
}

/// Elastic drop and dissipation across one jump of the front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpBalance {
    pub t: f64,
    pub from: f64,
    pub to: f64,
    pub elastic_drop: f64,
    pub dissipated: f64,
}

pub fn jump_balances(trajectory: &FrontTrajectory) -> Vec<JumpBalance> {
    let w = |t| trajectory.drive.value(t);
    trajectory
        .jumps
        .iter()
        .map(|&t| {
            let from = trajectory.front_before(t);
            let to = trajectory.front_at(t);
            JumpBalance {
                t,
                from,
                to,
                elastic_drop: front_energy(from, trajectory.length, w(t)) - front_energy(to, trajectory.length, w(t)),
                dissipated: trajectory.kappa.integral(from, to),
            }
        })
        .collect()
}

/// Exact trajectory for constant toughness and a non-negative drive.
///
/// The front follows `max(l0, w*/sqrt(2 kappa))`, where `w*` is the running
/// maximum, until the stability threshold `sqrt(2 kappa l min(l, L - l))` is
/// reached at `l = L/2` (or at `l0` when `l0 >= L/2`); there it jumps to `L`.
pub fn constant_kappa_front(drive: &TimeSeries, kappa: f64, l0: f64, length: f64) -> Result<FrontTrajectory, OneDimError> {
    let profile = KappaProfile::Constant { value: kappa };
    profile.validate()?;
    if !(length > 0.0) || !(0.0..=length).contains(&l0) {
        return Err(OneDimError::InvalidParameter(format!("need 0 <= l0 <= L, got l0={l0}, L={length}")));
    }
    if drive.min() < 0.0 {
        return Err(OneDimError::UnsupportedDriveClass(format!(
            "negative drive value {} has no closed-form front",
            drive.min()
        )));
    }
    let c = (2.0 * kappa).sqrt();
    let w_start = drive.value(drive.start());
    if l0 == 0.0 && w_start > 0.0 {
        return Err(OneDimError::InvalidParameter(format!("empty initial set with w(0) = {w_start}")));
    }
    if l0 < length && l0 > 0.0 && w_start > (2.0 * kappa * l0 * l0.min(length - l0)).sqrt() {
        return Err(OneDimError::UnsupportedDriveClass(format!(
            "initial front {l0} is not globally stable under w(0) = {w_start}"
        )));
    }
    let envelope = drive.running_max();
    let (times, values) = (envelope.times(), envelope.values());
    // Drive level that triggers the jump to L, and the front it jumps from.
    let (trigger, from) = if l0 >= length {
        (f64::INFINITY, length)
    } else if 2.0 * l0 >= length {
        ((2.0 * kappa * l0 * (length - l0)).sqrt(), l0)
    } else {
        (c * length / 2.0, length / 2.0)
    };
    let front_of = |m: f64| if 2.0 * l0 >= length { l0 } else { l0.max(m / c) };

    let mut pieces = Vec::new();
    let mut jumped = l0 >= length;
    for k in 0..times.len().saturating_sub(1) {
        let (t0, t1) = (times[k], times[k + 1]);
        let (m0, m1) = (values[k], values[k + 1]);
        if jumped {
            pieces.push(FrontPiece { t0, t1, front0: length, front1: length });
            continue;
        }
        let at = |m: f64| t0 + (m - m0) / (m1 - m0) * (t1 - t0);
        let mut cuts = vec![t0];
        if m1 > m0 && 2.0 * l0 < length && m0 < c * l0 && m1 > c * l0 {
            cuts.push(at(c * l0));
        }
        let jump_at = if m1 >= trigger && m1 > m0 { Some(at(trigger).max(t0)) } else { None };
        if let Some(tj) = jump_at {
            cuts.retain(|&s| s < tj);
            if tj > t0 {
                cuts.push(tj);
            }
        } else {
            cuts.push(t1);
        }
        for s in cuts.windows(2) {
            let m = |t: f64| envelope.value(t);
            pieces.push(FrontPiece { t0: s[0], t1: s[1], front0: front_of(m(s[0])), front1: front_of(m(s[1])) });
        }
        if let Some(tj) = jump_at {
            if pieces.is_empty() {
                pieces.push(FrontPiece { t0, t1: t0, front0: from, front1: from });
            }
            pieces.push(FrontPiece { t0: tj, t1, front0: length, front1: length });
            jumped = true;
        }
    }
    if pieces.is_empty() {
        let t = drive.start();
        pieces.push(FrontPiece { t0: t, t1: t, front0: l0, front1: l0 });
    }
    // Pin the pre-jump front exactly (the affine formula may round).
    for k in 1..pieces.len() {
        if pieces[k].front0 == length && pieces[k - 1].front1 < length {
            pieces[k - 1].front1 = from;
        }
    }
    FrontTrajectory::from_pieces(drive.clone(), profile, length, pieces)
}

/// Sum of tents of height `peaks[j]` on `[times[j+1], times[j]]`, with the
/// drive zero before `times[last]`.
///
/// `times` is strictly decreasing and has one more entry than `peaks`, which
/// is non-increasing and positive.
pub fn build_spiky_drive(times: &[f64], peaks: &[f64]) -> Result<TimeSeries, OneDimError> {
    if peaks.is_empty() || times.len() != peaks.len() + 1 {
        return Err(OneDimError::InvalidParameter(format!(
            "need n peaks and n+1 times, got {} and {}",
            peaks.len(),
            times.len()
        )));
    }
    if times.windows(2).any(|w| w[1] >= w[0]) || *times.last().unwrap() < 0.0 {
        return Err(OneDimError::NonMonotone("tent times must be strictly decreasing and non-negative".into()));
    }
    if peaks.windows(2).any(|w| w[1] > w[0]) || peaks.iter().any(|&a| !(a > 0.0)) {
        return Err(OneDimError::NonMonotone("tent peaks must be positive and non-increasing".into()));
    }
    let mut ts = Vec::with_capacity(2 * times.len() + 1);
    let mut vs = Vec::with_capacity(ts.capacity());
    let tail = *times.last().unwrap();
    if tail > 0.0 {
        ts.push(0.0);
        vs.push(0.0);
    }
    for j in (0..peaks.len()).rev() {
        let (lo, hi) = (times[j + 1], times[j]);
        if ts.last() != Some(&lo) {
            ts.push(lo);
            vs.push(0.0);
        }
        ts.push(0.5 * (lo + hi));
        vs.push(peaks[j]);
        ts.push(hi);
        vs.push(0.0);
    }
    TimeSeries::new(ts, vs).map_err(|e| OneDimError::InvalidParameter(e.to_string()))
}

/// Exact `int |ẇ| / sqrt(w*) dt`, the quantity whose divergence shows that the
/// power of the spiky drive is not integrable.
pub fn envelope_variation(drive: &TimeSeries) -> f64 {
    let envelope = drive.running_max();
    let (times, values) = (envelope.times(), envelope.values());
    let mut total = 0.0;
    for k in 0..times.len() - 1 {
        let (t0, t1) = (times[k], times[k + 1]);
        let (m0, m1) = (values[k], values[k + 1]);
        if m1 > m0 {
            total += 2.0 * (m1.sqrt() - m0.sqrt());
            continue;
        }
        if m0 <= 0.0 {
            continue;
        }
        let mut cuts = vec![t0];
        cuts.extend(drive.breakpoints_between(t0, t1));
        cuts.push(t1);
        for c in cuts.windows(2) {
            total += (drive.value(c[1]) - drive.value(c[0])).abs() / m0.sqrt();
        }
    }
    total
}
