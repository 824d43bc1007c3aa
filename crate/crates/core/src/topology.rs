//! Cell layout, user placement, mobility and serving-cell selection.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CellId = usize;
pub type UeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    #[serde(alias = "macro_only")]
    Macro,
    #[serde(alias = "macro_plus_picos")]
    Hetnet,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 2] = [ScenarioKind::Macro, ScenarioKind::Hetnet];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Macro => "macro",
            ScenarioKind::Hetnet => "hetnet",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "macro" | "macro_only" => Ok(ScenarioKind::Macro),
            "hetnet" | "macro_plus_picos" => Ok(ScenarioKind::Hetnet),
            other => Err(format!("unknown scenario {other:?} (expected macro or hetnet)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Macro,
    Pico,
}

impl CellKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Macro => "macro",
            CellKind::Pico => "pico",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSite {
    pub cell_id: CellId,
    pub kind: CellKind,
    pub position: Point,
    pub tx_power_dbm: f64,
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutParams {
    pub macro_radius_m: f64,
    pub macro_power_dbm: f64,
    pub pico_radius_m: f64,
    pub pico_power_dbm: f64,
    pub n_picos: usize,
    /// Pico centre distance from the macro site as a fraction of the macro radius.
    pub pico_distance_factor: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            macro_radius_m: 1000.0,
            macro_power_dbm: 49.0,
            pico_radius_m: 100.0,
            pico_power_dbm: 30.0,
            n_picos: 2,
            pico_distance_factor: 0.9,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.macro_radius_m > 0.0) || !(self.pico_radius_m > 0.0) {
            return bad("cell radii must be positive".into());
        }
        if self.pico_radius_m > self.macro_radius_m {
            return bad(format!(
                "pico radius {} m exceeds macro radius {} m",
                self.pico_radius_m, self.macro_radius_m
            ));
        }
        if !(self.pico_distance_factor > 0.0 && self.pico_distance_factor <= 1.0) {
            return bad(format!(
                "pico distance factor must lie in (0, 1], got {}",
                self.pico_distance_factor
            ));
        }
        Ok(())
    }

    fn pico_ring_radius(&self) -> f64 {
        self.pico_distance_factor * self.macro_radius_m
    }
}

/// Macro at the origin; picos evenly spaced in angle on a ring at
/// `pico_distance_factor * macro_radius`, the first one on the +x axis.
pub fn build_scenario(kind: ScenarioKind, params: &LayoutParams) -> Result<Vec<CellSite>> {
    params.validate()?;
    let mut cells = vec![CellSite {
        cell_id: 0,
        kind: CellKind::Macro,
        position: Point::ORIGIN,
        tx_power_dbm: params.macro_power_dbm,
        radius_m: params.macro_radius_m,
    }];
    if kind == ScenarioKind::Macro || params.n_picos == 0 {
        return Ok(cells);
    }
    let ring = params.pico_ring_radius();
    let n = params.n_picos;
    if n > 1 {
        let spacing = 2.0 * ring * (PI / n as f64).sin();
        if spacing < 2.0 * params.pico_radius_m {
            return Err(Error::InvalidGeometry(format!(
                "{n} picos of radius {} m overlap on a {ring} m ring",
                params.pico_radius_m
            )));
        }
    }
    for i in 0..n {
        let angle = TAU * i as f64 / n as f64;
        cells.push(CellSite {
            cell_id: i + 1,
            kind: CellKind::Pico,
            position: Point::new(ring * angle.cos(), ring * angle.sin()),
            tx_power_dbm: params.pico_power_dbm,
            radius_m: params.pico_radius_m,
        });
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// `macro_fraction` of the users uniform in the macro disc, the rest shared
    /// evenly among the pico discs.
    Split { macro_fraction: f64 },
    /// `n_users` uniform in every cell's disc.
    PerCell,
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Split { macro_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePosition {
    pub ue_id: UeId,
    pub position: Point,
    /// Direction of travel, radians.
    pub heading: f64,
    pub speed_mps: f64,
    /// Cell whose disc the UE was dropped in.
    pub home_cell: CellId,
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Uniform point in a disc by rejection from the bounding square.
pub fn sample_in_disc<R: Rng + ?Sized>(center: Point, radius: f64, rng: &mut R) -> Point {
    loop {
        let x = rng.random_range(-1.0..=1.0);
        let y = rng.random_range(-1.0..=1.0);
        if x * x + y * y <= 1.0 {
            return Point::new(center.x + radius * x, center.y + radius * y);
        }
    }
}

/// Number of users dropped in each cell's disc, indexed like `cells`.
pub fn users_per_cell(n_users: usize, cells: &[CellSite], placement: Placement) -> Vec<usize> {
    let picos = cells.len() - 1;
    if picos == 0 {
        return vec![n_users];
    }
    match placement {
        Placement::PerCell => vec![n_users; cells.len()],
        Placement::Split { macro_fraction } => {
            let in_macro = (n_users as f64 * macro_fraction).round() as usize;
            let in_macro = in_macro.min(n_users);
            let rest = n_users - in_macro;
            let mut counts = vec![in_macro];
            counts.extend((0..picos).map(|i| rest / picos + usize::from(i < rest % picos)));
            counts
        }
    }
}

pub fn place_users<R: Rng + ?Sized>(
    n_users: usize,
    cells: &[CellSite],
    placement: Placement,
    speed_mps: f64,
    rng: &mut R,
) -> Vec<UePosition> {
    let counts = users_per_cell(n_users, cells, placement);
    let mut ues = Vec::with_capacity(counts.iter().sum());
    for (cell, &count) in cells.iter().zip(&counts) {
        for _ in 0..count {
            let position = sample_in_disc(cell.position, cell.radius_m, rng);
            let heading = rng.random_range(0.0..TAU);
            ues.push(UePosition {
                ue_id: ues.len(),
                position,
                heading,
                speed_mps,
                home_cell: cell.cell_id,
            });
        }
    }
    ues
}

/// Straight-line motion; on leaving the macro disc the heading is redrawn
/// uniformly within 60 degrees of the inward radial direction, so the next
/// step always reduces the distance to the macro site.
pub fn move_ue<R: Rng + ?Sized>(ue: &mut UePosition, dt_s: f64, macro_radius_m: f64, rng: &mut R) {
    let step = ue.speed_mps * dt_s;
    ue.position.x += step * ue.heading.cos();
    ue.position.y += step * ue.heading.sin();
    if ue.position.norm() > macro_radius_m {
        let outward = ue.position.y.atan2(ue.position.x);
        ue.heading = (outward + rng.random_range(2.0 * PI / 3.0..4.0 * PI / 3.0)).rem_euclid(TAU);
    }
}

/// Serving-cell choice by received power with hysteresis.
///
/// With no current server the strongest cell wins. Otherwise a handover
/// happens only when the strongest cell beats the server by more than
/// `hysteresis_db`.
pub fn best_server(rx_dbm: &[f64], serving: Option<CellId>, hysteresis_db: f64) -> CellId {
    let strongest = rx_dbm
        .iter()
        .enumerate()
        .fold(0, |best, (i, &p)| if p > rx_dbm[best] { i } else { best });
    match serving {
        Some(s) if s < rx_dbm.len() => {
            if strongest != s && rx_dbm[strongest] > rx_dbm[s] + hysteresis_db {
                strongest
            } else {
                s
            }
        }
        _ => strongest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::pathloss_db;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn macro_only_layout() {
        let cells = build_scenario(ScenarioKind::Macro, &LayoutParams::default()).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].position, Point::ORIGIN);
        assert_eq!(cells[0].tx_power_dbm, 49.0);
    }

    #[test]
    fn two_picos_on_the_edge() {
        let cells = build_scenario(ScenarioKind::Hetnet, &LayoutParams::default()).unwrap();
        assert_eq!(cells.len(), 3);
        assert!((cells[1].position.x - 900.0).abs() < 1e-9 && cells[1].position.y.abs() < 1e-9);
        assert!((cells[2].position.x + 900.0).abs() < 1e-9 && cells[2].position.y.abs() < 1e-6);
        assert!(cells[1..].iter().all(|c| c.kind == CellKind::Pico && c.tx_power_dbm == 30.0));
    }

    #[test]
    fn overlapping_picos_rejected() {
        let p = LayoutParams { n_picos: 40, ..LayoutParams::default() };
        assert!(build_scenario(ScenarioKind::Hetnet, &p).is_err());
        let p = LayoutParams { pico_radius_m: 2000.0, ..LayoutParams::default() };
        assert!(build_scenario(ScenarioKind::Hetnet, &p).is_err());
    }

    #[test]
    fn pico_dominates_near_its_site() {
        let pico_rx = 30.0 - pathloss_db(0.010_f64).unwrap();
        let macro_rx = 49.0 - pathloss_db(0.9_f64).unwrap();
        assert!((pico_rx - (-22.9)).abs() < 1e-9);
        assert!((macro_rx - (-77.4)).abs() < 0.05, "{macro_rx}");
        assert_eq!(best_server(&[macro_rx, pico_rx], None, 1.0), 1);

        let at_origin = [49.0 - pathloss_db(0.0_f64).unwrap(), 30.0 - pathloss_db(0.9_f64).unwrap()];
        assert_eq!(best_server(&at_origin, None, 1.0), 0);
    }

    #[test]
    fn hysteresis_keeps_server() {
        assert_eq!(best_server(&[-80.0, -80.0], Some(0), 1.0), 0);
        assert_eq!(best_server(&[-80.0, -80.0], Some(1), 1.0), 1);
        assert_eq!(best_server(&[-80.0, -79.5], Some(0), 1.0), 0);
        assert_eq!(best_server(&[-80.0, -78.9], Some(0), 1.0), 1);
    }

    #[test]
    fn split_counts() {
        let cells = build_scenario(ScenarioKind::Hetnet, &LayoutParams::default()).unwrap();
        assert_eq!(users_per_cell(40, &cells, Placement::default()), vec![20, 10, 10]);
        assert_eq!(users_per_cell(7, &cells, Placement::default()), vec![4, 2, 1]);
        assert_eq!(users_per_cell(40, &cells, Placement::PerCell), vec![40, 40, 40]);
        let m = build_scenario(ScenarioKind::Macro, &LayoutParams::default()).unwrap();
        assert_eq!(users_per_cell(40, &m, Placement::PerCell), vec![40]);
    }

    #[test]
    fn placed_users_stay_in_their_disc() {
        let cells = build_scenario(ScenarioKind::Hetnet, &LayoutParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ues = place_users(40, &cells, Placement::default(), 0.8333, &mut rng);
        assert_eq!(ues.len(), 40);
        for ue in &ues {
            let c = &cells[ue.home_cell];
            assert!(ue.position.distance(c.position) <= c.radius_m + 1e-9);
        }
        let home: Vec<usize> = (0..3).map(|c| ues.iter().filter(|u| u.home_cell == c).count()).collect();
        assert_eq!(home, vec![20, 10, 10]);
    }

    #[test]
    fn radial_distribution_is_uniform_disc() {
        let cells = build_scenario(ScenarioKind::Macro, &LayoutParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let ues = place_users(100_000, &cells, Placement::default(), 0.0, &mut rng);
        let mut r: Vec<f64> = ues.iter().map(|u| u.position.norm() / 1000.0).collect();
        r.sort_by(f64::total_cmp);
        let n = r.len() as f64;
        // Kolmogorov-Smirnov distance against F(r) = r^2
        let ks = r
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = x * x;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS {ks}");
    }

    #[test]
    fn millisecond_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ue = UePosition {
            ue_id: 0,
            position: Point::new(10.0, 0.0),
            heading: 0.3,
            speed_mps: kmh_to_mps(3.0),
            home_cell: 0,
        };
        let before = ue.position;
        move_ue(&mut ue, 1e-3, 1000.0, &mut rng);
        let d = ue.position.distance(before);
        assert!((d - 0.000_833_333).abs() < 1e-9, "{d}");
    }

    proptest! {
        #[test]
        fn mobility_stays_near_disc(seed in any::<u64>(), x in -999.0f64..999.0, heading in 0.0f64..TAU) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = 0.0;
            let speed = 50.0;
            let dt = 0.1;
            let mut ue = UePosition { ue_id: 0, position: Point::new(x, y), heading, speed_mps: speed, home_cell: 0 };
            for _ in 0..2000 {
                let before = ue.position;
                move_ue(&mut ue, dt, 1000.0, &mut rng);
                prop_assert!((ue.position.distance(before) - speed * dt).abs() < 1e-6);
                prop_assert!(ue.position.norm() <= 1000.0 + speed * dt + 1e-9);
            }
        }
    }
}
