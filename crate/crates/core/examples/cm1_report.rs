//! Prints the baseline and measured-values reports of the bundled CM1 model.

use qualinet::{compile, parse_model, resolve_goal, run_scenario, Network, Scenario};

fn main() {
    let model = parse_model(include_str!("../models/cm1.qm")).unwrap();
    let goal = resolve_goal(&model, Some("maintenance")).unwrap();
    let net: Network = compile(&model, goal).unwrap();
    for file in [include_str!("../models/baseline.json"), include_str!("../models/measured.json")] {
        let s: Scenario = serde_json::from_str(file).unwrap();
        let r = run_scenario(&net, &s).unwrap();
        print!("{}", r.to_text(&net));
    }
}
