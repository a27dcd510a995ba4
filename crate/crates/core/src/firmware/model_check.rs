//! Exhaustive exploration of the automaton over a discretised input grid.
//!
//! A configuration is a mode plus the number of ticks spent in it. Time
//! only matters up to the largest timeout, so tick counts are capped just
//! past it, which keeps the graph finite. Every configuration is stepped
//! against every combination of grid pressure, grid force and command.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use super::automaton::{
    step_automaton, Buttons, CommandVector, ControllerConfig, Edge, GripperStateKind, Mode,
    StateVector, UserCommand,
};

/// Discretised guard inputs.
#[derive(Debug, Clone)]
pub struct GuardGrid {
    pub pressures_kpa: Vec<f64>,
    pub forces_gf: Vec<f64>,
    pub commands: Vec<CommandVector>,
}

impl GuardGrid {
    /// Values on, just inside and just outside every threshold.
    pub fn around(cfg: &ControllerConfig) -> Self {
        let d = 0.1;
        let mut pressures = vec![
            -28.0,
            cfg.p_min_kpa - d,
            cfg.p_min_kpa,
            cfg.p_min_kpa + d,
            0.5 * (cfg.p_min_kpa + cfg.p_max_kpa),
            cfg.p_max_kpa - d,
            cfg.p_max_kpa,
            cfg.p_max_kpa + d,
            2.0,
        ];
        pressures.sort_by(f64::total_cmp);
        pressures.dedup();
        let forces = vec![0.0, cfg.f_thr_gf - 1.0, cfg.f_thr_gf, cfg.f_thr_gf + 1.0, 2.0 * cfg.f_thr_gf];
        let b = |open, close| CommandVector::buttons(Buttons { open, close });
        let commands = vec![
            CommandVector::default(),
            CommandVector::user(UserCommand::Open),
            CommandVector::user(UserCommand::Close),
            CommandVector::user(UserCommand::SetForceThreshold(cfg.f_thr_gf)),
            b(true, false),
            b(false, true),
            b(true, true),
        ];
        Self {
            pressures_kpa: pressures,
            forces_gf: forces,
            commands,
        }
    }

    pub fn len(&self) -> usize {
        self.pressures_kpa.len() * self.forces_gf.len() * self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

type Config = (Mode, u64);

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckReport {
    pub configurations: usize,
    pub steps: usize,
    pub reachable: BTreeSet<GripperStateKind>,
    pub edges_taken: BTreeMap<Edge, usize>,
    /// Main-state changes that are not one of the six labelled edges.
    pub unlabelled_changes: BTreeSet<(GripperStateKind, GripperStateKind)>,
    /// Steps whose outputs ran both pumps.
    pub pump_conflicts: usize,
    /// Steps ending in opened or closed with a pump running or a valve open.
    pub unsealed_rest_states: usize,
    /// Longest tick index, over all input sequences, at which opened is
    /// entered after power-up; `None` if some sequence never gets there.
    pub worst_ticks_to_opened: Option<u64>,
    /// Longest possible stay in closing / opening, in ticks.
    pub max_closing_ticks: u64,
    pub max_opening_ticks: u64,
    pub tick_limit_to_opened: u64,
    pub closing_tick_limit: u64,
    pub opening_tick_limit: u64,
}

impl ModelCheckReport {
    pub fn safety_holds(&self) -> bool {
        self.pump_conflicts == 0
    }

    pub fn sealing_holds(&self) -> bool {
        self.unsealed_rest_states == 0
    }

    pub fn liveness_holds(&self) -> bool {
        matches!(self.worst_ticks_to_opened, Some(n) if n <= self.tick_limit_to_opened)
    }

    pub fn only_labelled_edges(&self) -> bool {
        self.unlabelled_changes.is_empty() && self.edges_taken.len() == Edge::ALL.len()
    }

    pub fn bounded_transitions(&self) -> bool {
        self.max_closing_ticks <= self.closing_tick_limit
            && self.max_opening_ticks <= self.opening_tick_limit
    }

    pub fn all_hold(&self) -> bool {
        self.safety_holds()
            && self.sealing_holds()
            && self.liveness_holds()
            && self.only_labelled_edges()
            && self.bounded_transitions()
            && self.reachable.len() == GripperStateKind::ALL.len()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let yes = |b: bool| if b { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "configurations explored: {}", self.configurations);
        let _ = writeln!(s, "automaton steps evaluated: {}", self.steps);
        let reach: Vec<_> = self.reachable.iter().map(|k| k.code()).collect();
        let _ = writeln!(s, "reachable states: {}", reach.join(" "));
        for (edge, n) in &self.edges_taken {
            let (a, b) = edge.endpoints();
            let _ = writeln!(s, "  edge {} {} -> {}: {} steps", edge.label(), a, b, n);
        }
        let _ = writeln!(
            s,
            "[{}] only labelled edges ({} unlabelled changes)",
            yes(self.only_labelled_edges()),
            self.unlabelled_changes.len()
        );
        let _ = writeln!(s, "[{}] pumps never both on ({} conflicts)", yes(self.safety_holds()), self.pump_conflicts);
        let _ = writeln!(
            s,
            "[{}] opened/closed sealed ({} violations)",
            yes(self.sealing_holds()),
            self.unsealed_rest_states
        );
        let worst = self
            .worst_ticks_to_opened
            .map_or_else(|| "unbounded".to_string(), |n| n.to_string());
        let _ = writeln!(
            s,
            "[{}] opened reached from power-up within {} ticks (limit {})",
            yes(self.liveness_holds()),
            worst,
            self.tick_limit_to_opened
        );
        let _ = writeln!(
            s,
            "[{}] closing lasts at most {} ticks (limit {}), opening at most {} ticks (limit {})",
            yes(self.bounded_transitions()),
            self.max_closing_ticks,
            self.closing_tick_limit,
            self.max_opening_ticks,
            self.opening_tick_limit
        );
        s
    }
}

fn ticks(seconds: f64, rate: f64) -> u64 {
    (seconds * rate).round() as u64
}

/// Explores every configuration reachable from power-up.
pub fn explore(cfg: &ControllerConfig, grid: &GuardGrid) -> ModelCheckReport {
    let rate = cfg.sample_rate_hz;
    let cap = ticks(cfg.t_vacc_s.max(cfg.t_infl_s), rate) + 2;

    let start: Config = (Mode::Undefined, 0);
    let mut successors: HashMap<Config, Vec<(Config, bool)>> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = BTreeSet::from([start]);

    let mut steps = 0;
    let mut reachable = BTreeSet::from([GripperStateKind::Undefined]);
    let mut edges_taken = BTreeMap::new();
    let mut unlabelled = BTreeSet::new();
    let mut pump_conflicts = 0;
    let mut unsealed = 0;
    let mut max_stay: HashMap<GripperStateKind, u64> = HashMap::new();

    while let Some(node @ (mode, k)) = queue.pop_front() {
        let tis = k as f64 / rate;
        let mut succ = BTreeSet::new();
        for &p in &grid.pressures_kpa {
            for &f in &grid.forces_gf {
                let q = StateVector {
                    t: 0.0,
                    k_gr: mode.kind(),
                    pressure_kpa: p,
                    force_gf: f,
                };
                for u in &grid.commands {
                    steps += 1;
                    let tr = step_automaton(mode, &q, u, tis, cfg);
                    if tr.outputs.pumps_conflict() {
                        pump_conflicts += 1;
                    }
                    if matches!(tr.mode, Mode::Opened | Mode::Closed) && !tr.outputs.is_sealed() {
                        unsealed += 1;
                    }
                    let (from, to) = (mode.kind(), tr.mode.kind());
                    if from != to {
                        match tr.edge {
                            Some(e) if e.endpoints() == (from, to) => {
                                *edges_taken.entry(e).or_insert(0) += 1;
                            }
                            _ => {
                                unlabelled.insert((from, to));
                            }
                        }
                    }
                    let next = if tr.mode == mode {
                        let stay = max_stay.entry(from).or_insert(0);
                        *stay = (*stay).max(k + 1);
                        (mode, (k + 1).min(cap))
                    } else {
                        (tr.mode, 1)
                    };
                    succ.insert((next, tr.mode == Mode::Opened && mode != Mode::Opened));
                }
            }
        }
        for &(next, _) in &succ {
            reachable.insert(next.0.kind());
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
        successors.insert(node, succ.into_iter().collect());
    }

    let worst = worst_ticks_to_opened(start, &successors);
    ModelCheckReport {
        configurations: seen.len(),
        steps,
        reachable,
        edges_taken,
        unlabelled_changes: unlabelled,
        pump_conflicts,
        unsealed_rest_states: unsealed,
        worst_ticks_to_opened: worst,
        max_closing_ticks: max_stay.get(&GripperStateKind::Closing).copied().unwrap_or(0),
        max_opening_ticks: max_stay.get(&GripperStateKind::Opening).copied().unwrap_or(0),
        tick_limit_to_opened: ticks(cfg.t_vacc_s + cfg.t_infl_s, rate) + 2,
        closing_tick_limit: ticks(cfg.t_vacc_s, rate) + 1,
        opening_tick_limit: ticks(cfg.t_infl_s, rate) + 1,
    }
}

/// Longest path, in ticks, from `start` until a step enters opened.
fn worst_ticks_to_opened(start: Config, succ: &HashMap<Config, Vec<(Config, bool)>>) -> Option<u64> {
    #[derive(Clone, Copy)]
    enum Mark {
        Active,
        Done(Option<u64>),
    }
    let mut marks: HashMap<Config, Mark> = HashMap::new();
    // iterative post-order DFS
    let mut stack: Vec<(Config, bool)> = vec![(start, false)];
    while let Some((node, expanded)) = stack.pop() {
        if expanded {
            let mut worst = Some(0u64);
            for &(next, enters_opened) in &succ[&node] {
                let cost = if enters_opened {
                    Some(0)
                } else {
                    match marks.get(&next) {
                        Some(Mark::Done(Some(n))) => Some(n + 1),
                        _ => None,
                    }
                };
                worst = match (worst, cost) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            }
            marks.insert(node, Mark::Done(worst));
            continue;
        }
        match marks.get(&node) {
            Some(Mark::Done(_)) => continue,
            Some(Mark::Active) => {
                // revisited while on the stack: a cycle that avoids opened
                marks.insert(node, Mark::Done(None));
                continue;
            }
            None => {}
        }
        marks.insert(node, Mark::Active);
        stack.push((node, true));
        for &(next, enters_opened) in &succ[&node] {
            if !enters_opened && !matches!(marks.get(&next), Some(Mark::Done(_))) {
                stack.push((next, false));
            }
        }
    }
    match marks.get(&start) {
        Some(Mark::Done(n)) => *n,
        _ => None,
    }
}

/// Human-readable transition table.
pub fn transition_table(cfg: &ControllerConfig) -> String {
    let rows = [
        (Edge::PowerUp, "power-up".to_string()),
        (
            Edge::Ready,
            format!(
                "evacuate until P < {} kPa or t > {} s, then inflate until P > {} kPa or t > {} s",
                cfg.p_min_kpa, cfg.t_vacc_s, cfg.p_max_kpa, cfg.t_infl_s
            ),
        ),
        (
            Edge::Jammed,
            format!("P < {} kPa or t > {} s", cfg.p_min_kpa, cfg.t_vacc_s),
        ),
        (
            Edge::Grasp,
            format!("F_m > {} gf, CLOSE command or close button", cfg.f_thr_gf),
        ),
        (Edge::Release, "OPEN command or open button".to_string()),
        (
            Edge::Fluidized,
            format!("P > {} kPa or t > {} s", cfg.p_max_kpa, cfg.t_infl_s),
        ),
    ];
    let mut s = String::from("edge  from      to        guard\n");
    for (edge, guard) in rows {
        let (a, b) = edge.endpoints();
        let _ = writeln!(s, "{:<5} {:<9} {:<9} {}", edge.label(), a.code(), b.code(), guard);
    }
    s.push_str("\nactuation\n");
    for mode in Mode::ALL {
        let o = super::automaton::outputs_for(mode);
        let _ = writeln!(
            s,
            "{:<20} pump_in={} pump_out={} valve1={} valve2={}",
            format!("{mode:?}"),
            o.pump_in_on as u8,
            o.pump_out_on as u8,
            o.valve1_open as u8,
            o.valve2_open as u8
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_automaton_passes_every_check() {
        let cfg = ControllerConfig::default();
        let report = explore(&cfg, &GuardGrid::around(&cfg));
        assert!(report.all_hold(), "{}", report.render());
        assert_eq!(report.worst_ticks_to_opened, Some(1802));
        assert_eq!(report.max_closing_ticks, 801);
        assert_eq!(report.max_opening_ticks, 1001);
    }

    #[test]
    fn short_timeouts_shrink_the_worst_case() {
        let cfg = ControllerConfig {
            t_vacc_s: 0.05,
            t_infl_s: 0.1,
            ..ControllerConfig::default()
        };
        let report = explore(&cfg, &GuardGrid::around(&cfg));
        assert!(report.all_hold(), "{}", report.render());
        assert_eq!(report.worst_ticks_to_opened, Some(5 + 10 + 2));
    }

    #[test]
    fn table_lists_all_edges() {
        let t = transition_table(&ControllerConfig::default());
        for label in 1..=6 {
            assert!(t.lines().any(|l| l.starts_with(&label.to_string())));
        }
    }
}
