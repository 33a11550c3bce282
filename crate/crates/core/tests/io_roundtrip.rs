use commwheel::io::{load_network, save_network, ResultFile};
use commwheel::network::generate_random;
use commwheel::protocol::{run_simulation, SimConfig};
use proptest::prelude::*;
use proptest::test_runner::Config;

proptest! {
    #![proptest_config(Config { cases: 300, failure_persistence: None, ..Config::default() })]

    #[test]
    fn network_files_round_trip_bit_for_bit(
        n in 20usize..80,
        side in 2.0f64..4.0,
        r in 1e-3f64..1e3,
        seed in any::<u64>(),
    ) {
        let net = generate_random(n, side * r, side * r, r, seed);
        prop_assume!(net.is_ok());
        let net = net.unwrap();
        let text = save_network(&net);
        let back = load_network(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(save_network(&back), text);
    }
}

#[test]
fn result_files_round_trip() {
    let net = generate_random(70, 5.0, 5.0, 1.0, 8).unwrap();
    let result = run_simulation(&net, &SimConfig::default());
    let file = ResultFile::from_run(&net, &result);
    let text = file.to_json();
    let back = ResultFile::from_json(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_json(), text);
}
