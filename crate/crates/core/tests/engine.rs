use lte_hetnet::config::RunConfig;
use lte_hetnet::output::write_run_outputs;
use lte_hetnet::topology::Point;
use lte_hetnet::traffic::FlowKind;
use lte_hetnet::{run_simulation, Algorithm, ScenarioKind, Simulation};

fn short(scenario: ScenarioKind, scheduler: Algorithm, users: usize, seed: u64) -> RunConfig {
    let mut c = RunConfig::default();
    c.scenario = scenario;
    c.scheduler = scheduler;
    c.users = users;
    c.seed = seed;
    c.simulation.duration_s = 1.0;
    c.simulation.flow_duration_s = 0.8;
    c
}

#[test]
fn identical_seeds_give_identical_files() {
    let mut cfg = short(ScenarioKind::Hetnet, Algorithm::Mlwdf, 12, 9);
    cfg.simulation.trace = true;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_run_outputs(a.path(), &run_simulation(cfg.clone()).unwrap(), false).unwrap();
    write_run_outputs(b.path(), &run_simulation(cfg).unwrap(), false).unwrap();
    for f in ["summary.csv", "flows.csv", "geometry.csv", "trace.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn seeds_change_the_outcome() {
    let a = run_simulation(short(ScenarioKind::Macro, Algorithm::Pf, 8, 1)).unwrap();
    let b = run_simulation(short(ScenarioKind::Macro, Algorithm::Pf, 8, 2)).unwrap();
    assert_ne!(a.summary.arrived_bits, b.summary.arrived_bits);
}

#[test]
fn tti_reports_respect_cell_capacity() {
    let cfg = short(ScenarioKind::Hetnet, Algorithm::Exppf, 20, 5);
    let rbs = cfg.radio.rb_count;
    let mut sim = Simulation::new(cfg).unwrap();
    assert_eq!(sim.cells().len(), 3);
    let mut served = 0u64;
    while !sim.is_finished() {
        let rep = sim.tti_step().unwrap();
        for (bits, granted) in rep.served_bits.iter().zip(&rep.granted_rbs) {
            assert!(*granted <= rbs);
            assert!(*bits <= (*granted as u64) * 756);
        }
        served += rep.served_bits.iter().sum::<u64>();
        assert!(sim.conservation_holds());
    }
    assert_eq!(served, sim.metrics().flows.iter().map(|f| f.transmitted_bits).sum::<u64>());
}

#[test]
fn nothing_arrives_after_flows_stop() {
    let mut cfg = short(ScenarioKind::Macro, Algorithm::Pf, 5, 3);
    cfg.simulation.duration_s = 1.0;
    cfg.simulation.flow_duration_s = 0.2;
    let mut sim = Simulation::new(cfg).unwrap();
    let mut arrived_at_stop = None;
    while !sim.is_finished() {
        sim.tti_step().unwrap();
        let arrived: u64 = sim.metrics().flows.iter().map(|f| f.arrived_bits).sum();
        if sim.tti_index() == 200 {
            arrived_at_stop = Some(arrived);
        }
        if sim.tti_index() > 200 {
            assert_eq!(Some(arrived), arrived_at_stop);
        }
    }
    // every queue is eventually emptied or dropped
    assert!(sim.flows().iter().all(|f| f.queue.is_empty()));
}

#[test]
fn close_user_in_idle_cell_sees_no_loss() {
    let mut cfg = short(ScenarioKind::Macro, Algorithm::Mlwdf, 1, 1);
    cfg.radio.shadowing = false;
    cfg.topology.mobility = false;
    cfg.topology.ue_positions = Some(vec![Point::new(50.0, 0.0)]);
    cfg.traffic.flows = vec![FlowKind::Video, FlowKind::Voip];
    let r = run_simulation(cfg).unwrap();
    assert!(r.summary.arrived_bits > 0);
    assert_eq!(r.summary.dropped_bits, 0);
    assert_eq!(r.summary.plr_video, 0.0);
    assert_eq!(r.summary.transmitted_bits, r.summary.arrived_bits);
}

#[test]
fn f32_and_f64_link_budgets_agree() {
    use lte_hetnet::channel::{pathloss_db, sinr_db};
    for d in [0.01, 0.1, 0.5, 1.0] {
        let a: f64 = pathloss_db(d).unwrap();
        let b: f32 = pathloss_db(d as f32).unwrap();
        assert!((a - b as f64).abs() < 1e-3);
        let s64: f64 = sinr_db(-80.0, &[-95.0, -100.0], -112.45);
        let s32: f32 = sinr_db(-80.0, &[-95.0, -100.0], -112.45);
        assert!((s64 - s32 as f64).abs() < 1e-3);
    }
}
