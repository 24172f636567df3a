use std::path::Path;

use survkit::dataset::write_cohort;
use survkit::synth::{generate_cohort, GroundTruth, SynthSpec};
use survkit::Result;

use super::start;
use crate::GlobalArgs;

pub fn run(g: &GlobalArgs, spec_path: &Path, seed: Option<u64>) -> Result<()> {
    let mut run = start(g, "synth")?;
    let mut spec: SynthSpec = serde_json::from_slice(&run.read_input(spec_path)?)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    run.seed(spec.seed);
    let records = generate_cohort(&spec)?;
    run.write_with("cohort.csv", |buf| write_cohort(&records, buf))?;
    run.json("ground_truth.json", &GroundTruth::new(&spec))?;
    let events = records.iter().filter(|r| g.policy.is_event(r.outcome)).count();
    println!("generated {} subjects, {} events under the {} policy", records.len(), events, g.policy.as_str());
    run.finish()
}
