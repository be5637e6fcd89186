use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EventKind, EventLog, EventQueue, EventRecord};
use crate::error::{ModelError, Result};
use crate::scaling::{
    activated_pool, antibody_requirement, check_feasible, hub_count, hub_size, recruitment_demand,
    ArchitectureSpec, ModelParams, RecruitmentMode, TimingBreakdown,
};

/// Coordinates in up to three dimensions; axes past the world's dimension stay 0.
pub type Point = [f64; 3];

/// Random-walk step length as a fraction of the shortest region side.
pub const DEFAULT_WALK_STEP_FRACTION: f64 = 0.05;

const MAX_WALK_STEPS: u64 = 50_000_000;
const MAX_DOUBLINGS: u64 = 4096;

/// Axis-aligned box `[lower, upper]` on the first `d` axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lower: Point,
    pub upper: Point,
}

impl Region {
    pub fn contains(&self, p: &Point, dimension: usize) -> bool {
        (0..dimension).all(|ax| p[ax] >= self.lower[ax] && p[ax] <= self.upper[ax])
    }

    pub fn volume(&self, dimension: usize) -> f64 {
        (0..dimension)
            .map(|ax| self.upper[ax] - self.lower[ax])
            .product()
    }

    pub fn center(&self, dimension: usize) -> Point {
        let mut c = [0.0; 3];
        for (ax, x) in c.iter_mut().enumerate().take(dimension) {
            *x = 0.5 * (self.lower[ax] + self.upper[ax]);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hub {
    pub position: Point,
    pub size: f64,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorState {
    Roaming,
    Loaded,
    Delivered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub position: Point,
    pub state: DetectorState,
    /// Index of the hub whose region holds the detector.
    pub hub: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Movement {
    /// Straight line at the detector speed.
    #[default]
    Straight,
    /// Fixed-length steps in uniform random directions, reflected at the
    /// region boundary and absorbed within one step of the hub.
    RandomWalk,
}

impl Movement {
    pub fn as_str(&self) -> &'static str {
        match self {
            Movement::Straight => "straight",
            Movement::RandomWalk => "random_walk",
        }
    }
}

impl FromStr for Movement {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "straight" => Ok(Movement::Straight),
            "random_walk" => Ok(Movement::RandomWalk),
            other => Err(ModelError::invalid(
                "movement",
                format!("unknown movement `{other}` (expected straight|random_walk)"),
            )),
        }
    }
}

impl fmt::Display for Movement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
enum SimEvent {
    Arrival { detector: usize },
    Contact { ordinal: u64, peer: usize },
    Tick { n: u64 },
}

#[derive(Debug, Clone, Copy)]
struct Detection {
    time: f64,
    hub: usize,
}

/// Factor `n` into `dimension` per-axis cell counts with the smallest
/// max/min ratio. Among equally square shapes the first found (smallest
/// leading factor) wins.
pub fn grid_shape(n: usize, dimension: usize) -> [usize; 3] {
    assert!(n >= 1 && (1..=3).contains(&dimension));
    let divisors: Vec<usize> = (1..=n).filter(|&f| n.is_multiple_of(f)).collect();
    let ratio = |s: &[usize]| {
        let max = *s.iter().max().unwrap() as f64;
        let min = *s.iter().min().unwrap() as f64;
        max / min
    };
    match dimension {
        1 => [n, 1, 1],
        2 => {
            let mut best = [n, 1, 1];
            let mut best_ratio = f64::INFINITY;
            for &f in &divisors {
                let shape = [f, n / f];
                let r = ratio(&shape);
                if r < best_ratio {
                    best_ratio = r;
                    best = [f, n / f, 1];
                }
            }
            best
        }
        _ => {
            let mut best = [n, 1, 1];
            let mut best_ratio = f64::INFINITY;
            for &f in &divisors {
                for &g in divisors.iter().filter(|&&g| (n / f).is_multiple_of(g)) {
                    let shape = [f, g, n / f / g];
                    let r = ratio(&shape);
                    if r < best_ratio {
                        best_ratio = r;
                        best = shape;
                    }
                }
            }
            best
        }
    }
}

fn distance(a: &Point, b: &Point) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Everything needed for one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mass: f64,
    pub arch: ArchitectureSpec,
    pub params: ModelParams,
    pub seed: u64,
    /// Infection site; drawn uniformly from the domain when `None`.
    pub site: Option<Point>,
    pub detectors: usize,
    pub movement: Movement,
    pub walk_step_fraction: f64,
}

impl SimConfig {
    pub fn new(mass: f64, arch: ArchitectureSpec, params: ModelParams, seed: u64) -> Self {
        Self {
            mass,
            arch,
            params,
            seed,
            site: None,
            detectors: 1,
            movement: Movement::Straight,
            walk_step_fraction: DEFAULT_WALK_STEP_FRACTION,
        }
    }
}

/// One tiled domain with its hubs, detectors and pending events.
pub struct SimWorld {
    mass: f64,
    arch: ArchitectureSpec,
    params: ModelParams,
    dimension: usize,
    domain_extent: f64,
    cells: [usize; 3],
    cell_len: [f64; 3],
    hubs: Vec<Hub>,
    detectors: Vec<Detector>,
    queue: EventQueue<SimEvent>,
    clock: f64,
    seed: u64,
    rng: ChaCha8Rng,
    log: EventLog,
    walk_step_fraction: f64,
    detection: Option<Detection>,
    recruit_duration: Option<f64>,
    expand_duration: Option<f64>,
    population: f64,
}

impl SimWorld {
    pub fn build(
        mass: f64,
        arch: ArchitectureSpec,
        params: ModelParams,
        seed: u64,
    ) -> Result<Self> {
        check_feasible(&arch, &params)?;
        let count = hub_count(mass, &arch)?.rounded as usize;
        let size = hub_size(mass, &arch)?;
        let dimension = arch.dimension() as usize;
        let volume = params.body_volume_coefficient * mass;
        let domain_extent = match dimension {
            1 => volume,
            2 => volume.sqrt(),
            _ => volume.cbrt(),
        };
        let cells = grid_shape(count, dimension);
        let mut cell_len = [0.0; 3];
        for ax in 0..dimension {
            cell_len[ax] = domain_extent / cells[ax] as f64;
        }

        let mut hubs = Vec::with_capacity(count);
        for index in 0..count {
            let idx = Self::decode(index, &cells);
            let mut region = Region {
                lower: [0.0; 3],
                upper: [0.0; 3],
            };
            for ax in 0..dimension {
                region.lower[ax] = idx[ax] as f64 * cell_len[ax];
                region.upper[ax] = if idx[ax] + 1 == cells[ax] {
                    domain_extent
                } else {
                    (idx[ax] + 1) as f64 * cell_len[ax]
                };
            }
            hubs.push(Hub {
                position: region.center(dimension),
                size,
                region,
            });
        }

        Ok(Self {
            mass,
            arch,
            params,
            dimension,
            domain_extent,
            cells,
            cell_len,
            hubs,
            detectors: Vec::new(),
            queue: EventQueue::new(),
            clock: 0.0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: EventLog::new(),
            walk_step_fraction: DEFAULT_WALK_STEP_FRACTION,
            detection: None,
            recruit_duration: None,
            expand_duration: None,
            population: 0.0,
        })
    }

    // row-major, axis 0 most significant
    fn decode(mut index: usize, cells: &[usize; 3]) -> [usize; 3] {
        let mut idx = [0; 3];
        for ax in (0..3).rev() {
            idx[ax] = index % cells[ax];
            index /= cells[ax];
        }
        idx
    }

    pub fn set_walk_step_fraction(&mut self, fraction: f64) -> Result<()> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(ModelError::invalid(
                "walk_step",
                format!("{fraction} not in (0, 1]"),
            ));
        }
        self.walk_step_fraction = fraction;
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn domain_extent(&self) -> f64 {
        self.domain_extent
    }

    pub fn grid(&self) -> [usize; 3] {
        self.cells
    }

    pub fn hubs(&self) -> &[Hub] {
        &self.hubs
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    /// Region holding `p`. A point on a shared face belongs to the region
    /// with the lowest index.
    pub fn region_of(&self, p: &Point) -> Option<usize> {
        let mut index = 0;
        for (ax, &x) in p.iter().enumerate() {
            let i = if ax < self.dimension {
                if !(0.0..=self.domain_extent).contains(&x) {
                    return None;
                }
                let i = (x / self.cell_len[ax]).ceil() as isize - 1;
                i.clamp(0, self.cells[ax] as isize - 1) as usize
            } else {
                0
            };
            index = index * self.cells[ax] + i;
        }
        Some(index)
    }

    /// Loads `detectors` detectors at `site` (or a uniformly drawn site) and
    /// returns the index of the hub that drains it.
    pub fn spawn_infection(&mut self, site: Option<Point>, detectors: usize) -> Result<usize> {
        let site = match site {
            Some(p) => p,
            None => {
                let mut p = [0.0; 3];
                for x in p.iter_mut().take(self.dimension) {
                    *x = self.rng.gen::<f64>() * self.domain_extent;
                }
                p
            }
        };
        let hub = self.region_of(&site).ok_or_else(|| {
            ModelError::Domain(format!(
                "infection site {:?} outside the domain [0, {}]^{}",
                &site[..self.dimension],
                self.domain_extent,
                self.dimension
            ))
        })?;
        for _ in 0..detectors {
            self.detectors.push(Detector {
                position: site,
                state: DetectorState::Loaded,
                hub,
            });
        }
        Ok(hub)
    }

    fn process_next(&mut self) -> Option<SimEvent> {
        let (time, event) = self.queue.pop()?;
        self.clock = time;
        let (kind, subject, hub) = match event {
            SimEvent::Arrival { detector } => {
                let d = &mut self.detectors[detector];
                d.state = DetectorState::Delivered;
                d.position = self.hubs[d.hub].position;
                if self.detection.is_none() {
                    self.detection = Some(Detection { time, hub: d.hub });
                }
                (EventKind::Arrival, detector as u64, d.hub as u64)
            }
            SimEvent::Contact { ordinal, peer } => {
                (EventKind::ContactComplete, ordinal, peer as u64)
            }
            SimEvent::Tick { n } => {
                let hub = self.detection.map_or(0, |d| d.hub);
                (EventKind::DoublingTick, n, hub as u64)
            }
        };
        self.log.push(EventRecord {
            time,
            kind,
            subject,
            hub,
        });
        Some(event)
    }

    fn log_since(&self, start: usize) -> EventLog {
        let mut out = EventLog::new();
        for r in &self.log.records()[start..] {
            out.push(*r);
        }
        out
    }

    fn random_direction(&mut self) -> Point {
        match self.dimension {
            1 => {
                if self.rng.gen::<bool>() {
                    [1.0, 0.0, 0.0]
                } else {
                    [-1.0, 0.0, 0.0]
                }
            }
            2 => {
                let theta = self.rng.gen::<f64>() * std::f64::consts::TAU;
                [theta.cos(), theta.sin(), 0.0]
            }
            _ => {
                let z = 2.0 * self.rng.gen::<f64>() - 1.0;
                let phi = self.rng.gen::<f64>() * std::f64::consts::TAU;
                let r = (1.0 - z * z).sqrt();
                [r * phi.cos(), r * phi.sin(), z]
            }
        }
    }

    fn walk_time(&mut self, detector: usize) -> Result<f64> {
        let hub = &self.hubs[self.detectors[detector].hub];
        let region = hub.region;
        let target = hub.position;
        let shortest = (0..self.dimension)
            .map(|ax| region.upper[ax] - region.lower[ax])
            .fold(f64::INFINITY, f64::min);
        let step = self.walk_step_fraction * shortest;
        let mut p = self.detectors[detector].position;
        let mut steps = 0u64;
        while distance(&p, &target) > step {
            if steps >= MAX_WALK_STEPS {
                return Err(ModelError::Invariant(format!(
                    "random walk of detector {detector} not absorbed after {MAX_WALK_STEPS} steps"
                )));
            }
            let dir = self.random_direction();
            for ax in 0..self.dimension {
                let mut x = p[ax] + step * dir[ax];
                if x < region.lower[ax] {
                    x = 2.0 * region.lower[ax] - x;
                }
                if x > region.upper[ax] {
                    x = 2.0 * region.upper[ax] - x;
                }
                p[ax] = x.clamp(region.lower[ax], region.upper[ax]);
            }
            steps += 1;
        }
        Ok(steps as f64 * step / self.params.detector_speed)
    }

    /// Moves every loaded detector toward its hub and runs until the first
    /// arrival. Returns the first-arrival time and the events processed.
    pub fn run_detection(&mut self, movement: Movement) -> Result<(f64, EventLog)> {
        let loaded: Vec<usize> = (0..self.detectors.len())
            .filter(|&i| self.detectors[i].state == DetectorState::Loaded)
            .collect();
        if loaded.is_empty() {
            return Err(ModelError::Domain("no loaded detector to deliver".into()));
        }
        let start = self.clock;
        let log_start = self.log.len();
        for i in loaded {
            let det = &self.detectors[i];
            match self.region_of(&det.position) {
                Some(r) if r == det.hub => {}
                _ => {
                    return Err(ModelError::Invariant(format!(
                        "detector {i} at {:?} is not inside its draining region {}",
                        &det.position[..self.dimension],
                        det.hub
                    )))
                }
            }
            let travel = match movement {
                Movement::Straight => {
                    distance(&det.position, &self.hubs[det.hub].position)
                        / self.params.detector_speed
                }
                Movement::RandomWalk => self.walk_time(i)?,
            };
            self.queue
                .push(start + travel, SimEvent::Arrival { detector: i });
        }
        while self.detection.is_none() {
            if self.process_next().is_none() {
                return Err(ModelError::Invariant(
                    "event queue drained before arrival".into(),
                ));
            }
        }
        let t_detect = self.detection.map(|d| d.time - start).unwrap_or_default();
        Ok((t_detect, self.log_since(log_start)))
    }

    /// Contacts peer hubs nearest-first until the infected hub can activate
    /// `B_crit` responders.
    pub fn run_recruitment(&mut self) -> Result<(f64, EventLog)> {
        let detection = self.detection.ok_or_else(|| {
            ModelError::Invariant("recruitment started before any detection".into())
        })?;
        let log_start = self.log.len();
        let k = recruitment_demand(self.mass, &self.arch, &self.params)? as usize;
        let origin = self.hubs[detection.hub].position;
        let mut peers: Vec<(f64, usize)> = (0..self.hubs.len())
            .filter(|&h| h != detection.hub)
            .map(|h| (distance(&origin, &self.hubs[h].position), h))
            .collect();
        peers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if peers.len() < k {
            return Err(ModelError::Invariant(format!(
                "need {k} peers but the world has {}",
                peers.len()
            )));
        }

        let lambda = self.params.contact_latency;
        let mut duration: f64 = 0.0;
        for (i, &(dist, peer)) in peers.iter().take(k).enumerate() {
            let rounds = match self.params.recruitment {
                RecruitmentMode::Serial => (i + 1) as f64,
                // contact i goes out in fan-out round floor(log2(i + 1)) + 1
                RecruitmentMode::Tree => (usize::BITS - (i + 1).leading_zeros()) as f64,
            };
            let mut offset = rounds * lambda;
            if self.params.transit_coefficient > 0.0 {
                offset += self.params.transit_coefficient * dist / self.params.detector_speed;
            }
            duration = duration.max(offset);
            self.queue.push(
                detection.time + offset,
                SimEvent::Contact {
                    ordinal: i as u64,
                    peer,
                },
            );
        }
        let mut done = 0;
        while done < k {
            match self.process_next() {
                Some(SimEvent::Contact { .. }) => done += 1,
                Some(_) => {}
                None => {
                    return Err(ModelError::Invariant(
                        "event queue drained mid-recruitment".into(),
                    ))
                }
            }
        }
        self.recruit_duration = Some(duration);
        Ok((duration, self.log_since(log_start)))
    }

    /// Doubles the activated pool every doubling period until it meets the
    /// antibody target.
    pub fn run_expansion(&mut self) -> Result<(f64, EventLog)> {
        let detection = self.detection.ok_or_else(|| {
            ModelError::Invariant("expansion started before any detection".into())
        })?;
        let recruit = self
            .recruit_duration
            .ok_or_else(|| ModelError::Invariant("expansion started before recruitment".into()))?;
        let log_start = self.log.len();
        let start = detection.time + recruit;
        let tau = self.params.doubling_time;
        let alpha = self.params.plasma_yield;
        let antibody = antibody_requirement(self.mass, &self.params)?;
        self.population = activated_pool(self.mass, &self.arch, &self.params)?;

        let mut ticks = 0u64;
        if self.population * alpha < antibody {
            self.queue.push(start + tau, SimEvent::Tick { n: 1 });
            loop {
                match self.process_next() {
                    Some(SimEvent::Tick { n }) => {
                        self.population *= 2.0;
                        if self.population * alpha >= antibody {
                            ticks = n;
                            break;
                        }
                        if n >= MAX_DOUBLINGS {
                            return Err(ModelError::Invariant(format!(
                                "antibody target not met after {MAX_DOUBLINGS} doublings"
                            )));
                        }
                        self.queue
                            .push(start + (n + 1) as f64 * tau, SimEvent::Tick { n: n + 1 });
                    }
                    Some(_) => {}
                    None => {
                        return Err(ModelError::Invariant(
                            "event queue drained mid-expansion".into(),
                        ))
                    }
                }
            }
        }
        let duration = ticks as f64 * tau;
        self.expand_duration = Some(duration);
        Ok((duration, self.log_since(log_start)))
    }

    /// Processes whatever is still queued (late detector arrivals).
    pub fn drain(&mut self) -> EventLog {
        let log_start = self.log.len();
        while self.process_next().is_some() {}
        self.log_since(log_start)
    }

    pub fn responder_population(&self) -> f64 {
        self.population
    }
}

/// Build, infect, detect, recruit and expand. Returns the phase durations
/// and the full event log.
pub fn simulate(config: &SimConfig) -> Result<(TimingBreakdown, EventLog)> {
    let mut world = SimWorld::build(config.mass, config.arch, config.params, config.seed)?;
    world.set_walk_step_fraction(config.walk_step_fraction)?;
    world.spawn_infection(config.site, config.detectors)?;
    let (t_detect, _) = world.run_detection(config.movement)?;
    let (t_recruit, _) = world.run_recruitment()?;
    let (t_expand, _) = world.run_expansion()?;
    world.drain();
    let timing = TimingBreakdown::new(t_detect, t_recruit, t_expand)?;
    Ok((timing, world.log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arch(a: f64, n0: f64, d: u8) -> ArchitectureSpec {
        ArchitectureSpec::new(a, n0, 1e6, d).unwrap()
    }

    #[test]
    fn grid_shapes_are_near_square() {
        assert_eq!(grid_shape(16, 2), [4, 4, 1]);
        assert_eq!(grid_shape(8, 2), [2, 4, 1]);
        assert_eq!(grid_shape(7, 2), [1, 7, 1]);
        assert_eq!(grid_shape(8, 3), [2, 2, 2]);
        assert_eq!(grid_shape(12, 3), [2, 2, 3]);
        assert_eq!(grid_shape(5, 1), [5, 1, 1]);
    }

    #[test]
    fn single_hub_covers_domain() {
        let w = SimWorld::build(1.0, arch(0.5, 1.0, 2), ModelParams::default(), 1).unwrap();
        assert_eq!(w.hubs().len(), 1);
        let hub = &w.hubs()[0];
        assert_eq!(hub.region.lower, [0.0; 3]);
        assert_eq!(hub.region.upper, [1.0, 1.0, 0.0]);
        assert_eq!(hub.position, [0.5, 0.5, 0.0]);
    }

    #[test]
    fn modular_world_of_eight_regions() {
        let params = ModelParams::default();
        let w = SimWorld::build(4.0, arch(1.0, 2.0, 2), params, 1).unwrap();
        assert_eq!(w.hubs().len(), 8);
        for hub in w.hubs() {
            let v = hub.region.volume(2);
            assert!((v - 4.0 / 8.0).abs() <= 1e-9 * 0.5);
            assert!(hub.region.contains(&hub.position, 2));
        }
    }

    #[test]
    fn boundary_points_go_to_lowest_region() {
        let w = SimWorld::build(4.0, arch(1.0, 1.0, 2), ModelParams::default(), 1).unwrap();
        // 2x2 grid on [0, 2]^2, cells of side 1
        assert_eq!(w.grid(), [2, 2, 1]);
        assert_eq!(w.region_of(&[1.0, 0.5, 0.0]), Some(0));
        assert_eq!(w.region_of(&[1.5, 1.0, 0.0]), Some(2));
        assert_eq!(w.region_of(&[1.0, 1.0, 0.0]), Some(0));
        assert_eq!(w.region_of(&[2.0, 2.0, 0.0]), Some(3));
        assert_eq!(w.region_of(&[0.0, 0.0, 0.0]), Some(0));
        assert_eq!(w.region_of(&[2.5, 0.0, 0.0]), None);
    }

    #[test]
    fn site_outside_domain_is_rejected() {
        let mut w = SimWorld::build(1.0, arch(0.5, 1.0, 2), ModelParams::default(), 1).unwrap();
        assert!(w.spawn_infection(Some([1.5, 0.5, 0.0]), 1).is_err());
    }

    #[test]
    fn detection_needs_loaded_detector() {
        let mut w = SimWorld::build(1.0, arch(0.5, 1.0, 2), ModelParams::default(), 1).unwrap();
        assert!(w.run_detection(Movement::Straight).is_err());
        assert!(w.run_recruitment().is_err());
    }

    #[test]
    fn straight_arrival_is_distance_over_speed() {
        // one hub at (5, 5) in a 10x10 domain
        let mut w = SimWorld::build(100.0, arch(0.0, 1.0, 2), ModelParams::default(), 1).unwrap();
        w.spawn_infection(Some([5.0, 2.0, 0.0]), 1).unwrap();
        let (t, log) = w.run_detection(Movement::Straight).unwrap();
        assert_eq!(t, 3.0);
        assert_eq!(log.count(EventKind::Arrival), 1);
    }

    #[test]
    fn site_at_hub_detects_immediately() {
        let mut w = SimWorld::build(16.0, arch(0.5, 1.0, 2), ModelParams::default(), 1).unwrap();
        let hub = w.hubs()[3].position;
        assert_eq!(w.spawn_infection(Some(hub), 3).unwrap(), 3);
        let (t, _) = w.run_detection(Movement::Straight).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn random_site_is_reproducible() {
        let mut a = SimWorld::build(16.0, arch(0.5, 1.0, 2), ModelParams::default(), 9).unwrap();
        let mut b = SimWorld::build(16.0, arch(0.5, 1.0, 2), ModelParams::default(), 9).unwrap();
        a.spawn_infection(None, 1).unwrap();
        b.spawn_infection(None, 1).unwrap();
        assert_eq!(a.detectors()[0].position, b.detectors()[0].position);
    }

    #[test]
    fn recruitment_contacts_nearest_peers_first() {
        let params = ModelParams {
            contact_latency: 0.25,
            ..ModelParams::default()
        };
        // a = 1, M = 16: 16 hubs in a 4x4 grid, k = ceil(0.5 * 16 - 1) = 7
        let mut w = SimWorld::build(16.0, arch(1.0, 1.0, 2), params, 3).unwrap();
        let corner = w.hubs()[0].position;
        w.spawn_infection(Some(corner), 1).unwrap();
        w.run_detection(Movement::Straight).unwrap();
        let (t, log) = w.run_recruitment().unwrap();
        assert_eq!(t, 7.0 * 0.25);
        let peers: Vec<u64> = log.records().iter().map(|r| r.hub).collect();
        // distance 1: hubs 1, 4; sqrt 2: 5; distance 2: 2, 8; sqrt 5: 6, 9
        assert_eq!(peers, [1, 4, 5, 2, 8, 6, 9]);
        for (i, r) in log.records().iter().enumerate() {
            assert_eq!(r.subject, i as u64);
            assert_eq!(r.time, (i + 1) as f64 * 0.25);
        }
    }

    #[test]
    fn zero_demand_means_zero_recruitment() {
        let mut w = SimWorld::build(100.0, arch(0.0, 1.0, 2), ModelParams::default(), 1).unwrap();
        w.spawn_infection(None, 1).unwrap();
        w.run_detection(Movement::Straight).unwrap();
        let (t, log) = w.run_recruitment().unwrap();
        assert_eq!(t, 0.0);
        assert!(log.is_empty());
    }

    #[test]
    fn expansion_counts_doublings() {
        // calibrated target is 16 * B_crit: four doublings
        let mut w = SimWorld::build(10.0, arch(0.5, 1.0, 2), ModelParams::default(), 1).unwrap();
        w.spawn_infection(None, 1).unwrap();
        w.run_detection(Movement::Straight).unwrap();
        w.run_recruitment().unwrap();
        let (t, log) = w.run_expansion().unwrap();
        assert_eq!(t, 4.0);
        assert_eq!(log.count(EventKind::DoublingTick), 4);

        // target = pool * 8: three doublings
        let params = ModelParams {
            antibody_coefficient: 0.5 * 8.0,
            ..ModelParams::default()
        };
        let mut w = SimWorld::build(10.0, arch(0.5, 1.0, 2), params, 1).unwrap();
        w.spawn_infection(None, 1).unwrap();
        w.run_detection(Movement::Straight).unwrap();
        w.run_recruitment().unwrap();
        assert_eq!(w.run_expansion().unwrap().0, 3.0);

        // pool already sufficient
        let params = ModelParams {
            antibody_coefficient: 0.25,
            ..ModelParams::default()
        };
        let mut w = SimWorld::build(10.0, arch(0.5, 1.0, 2), params, 1).unwrap();
        w.spawn_infection(None, 1).unwrap();
        w.run_detection(Movement::Straight).unwrap();
        w.run_recruitment().unwrap();
        let (t, log) = w.run_expansion().unwrap();
        assert_eq!(t, 0.0);
        assert!(log.is_empty());
    }

    #[test]
    fn tree_recruitment_rounds() {
        let params = ModelParams {
            contact_latency: 1.0,
            recruitment: RecruitmentMode::Tree,
            ..ModelParams::default()
        };
        let mut w = SimWorld::build(16.0, arch(1.0, 1.0, 2), params, 3).unwrap();
        w.spawn_infection(None, 1).unwrap();
        w.run_detection(Movement::Straight).unwrap();
        let (t, log) = w.run_recruitment().unwrap();
        // k = 7 contacts: rounds 1, 2, 2, 3, 3, 3, 3
        assert_eq!(t, 3.0);
        assert_eq!(log.len(), 7);
    }

    #[test]
    fn late_arrivals_keep_the_log_ordered() {
        let config = SimConfig {
            detectors: 5,
            movement: Movement::RandomWalk,
            ..SimConfig::new(64.0, arch(0.5, 1.0, 2), ModelParams::default(), 11)
        };
        let (timing, log) = simulate(&config).unwrap();
        assert_eq!(log.count(EventKind::Arrival), 5);
        let times: Vec<f64> = log.records().iter().map(|r| r.time).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(
            timing.t_total(),
            timing.t_detect() + timing.t_recruit() + timing.t_expand()
        );
    }

    #[test]
    fn phases_are_ordered_in_the_log() {
        let config = SimConfig::new(256.0, arch(0.5, 1.0, 2), ModelParams::default(), 5);
        let (timing, log) = simulate(&config).unwrap();
        let first_arrival = log
            .records()
            .iter()
            .find(|r| r.kind == EventKind::Arrival)
            .unwrap()
            .time;
        let last_contact = log
            .records()
            .iter()
            .filter(|r| r.kind == EventKind::ContactComplete)
            .map(|r| r.time)
            .fold(first_arrival, f64::max);
        for r in log.records() {
            match r.kind {
                EventKind::ContactComplete => assert!(r.time >= first_arrival),
                EventKind::DoublingTick => assert!(r.time >= last_contact),
                EventKind::Arrival => {}
            }
        }
        assert_eq!(timing.t_detect(), first_arrival);
    }

    proptest! {
        #[test]
        fn every_point_has_exactly_one_region(
            n0 in 1u32..6,
            a in 0.0f64..=1.0,
            m in 1.0f64..200.0,
            d in 1u8..=3,
            u in prop::array::uniform3(0.0f64..=1.0),
        ) {
            let arch = ArchitectureSpec::new(a, n0 as f64, 1e6, d).unwrap();
            let w = SimWorld::build(m, arch, ModelParams::default(), 0).unwrap();
            let dim = d as usize;
            let mut p = [0.0; 3];
            for ax in 0..dim {
                p[ax] = u[ax] * w.domain_extent();
            }
            let owner = w.region_of(&p).unwrap();
            prop_assert!(w.hubs()[owner].region.contains(&p, dim));
            // any other region containing p is a boundary neighbour with a higher index
            for (i, hub) in w.hubs().iter().enumerate() {
                if i != owner && hub.region.contains(&p, dim) {
                    prop_assert!(i > owner);
                }
            }
            let total: f64 = w.hubs().iter().map(|h| h.region.volume(dim)).sum();
            let domain = w.domain_extent().powi(d as i32);
            prop_assert!((total - domain).abs() <= 1e-9 * domain);
        }
    }
}
