use simcore::net::topology::{FTP_CLIENT, FTP_SERVER, GAME_CLIENT, GAME_SERVER, UPLINK};
use simcore::net::{build_dumbbell, TopologyParams};
use simcore::kernel::SimTime;
use simcore::{run_scenario, FlowSpec, ScenarioConfig};

#[test]
fn every_path_propagates_in_80_ms() {
    let topo = build_dumbbell(&TopologyParams::default()).unwrap();
    for (a, b) in [(GAME_CLIENT, GAME_SERVER), (FTP_CLIENT, FTP_SERVER)] {
        assert_eq!(topo.path_propagation(a, b), SimTime::from_millis(80));
        assert_eq!(topo.path_propagation(b, a), SimTime::from_millis(80));
    }
    assert_eq!(topo.next_hop(GAME_CLIENT, GAME_SERVER).0, topo.next_hop(GAME_CLIENT, FTP_SERVER).0);
    assert_eq!(topo.link_between(simcore::net::topology::HOME_ROUTER, simcore::net::topology::ISP_ROUTER), Some(UPLINK));
}

#[test]
fn idle_network_adds_only_serialization() {
    let cfg = ScenarioConfig {
        duration_s: 200.0,
        flows: vec![FlowSpec::wow()],
        ..ScenarioConfig::default()
    };
    let s = run_scenario(&cfg).unwrap().summary;
    let q = s.uplink();
    assert_eq!(q.drops, 0);
    assert!(q.mean_occupancy_pkts < 0.05, "{}", q.mean_occupancy_pkts);
}
