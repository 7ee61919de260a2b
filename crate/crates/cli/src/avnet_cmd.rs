//! `avnet`: run the discrete-log majority protocol on a preset group,
//! either for one vote vector (prints the transcript) or for every
//! vector (prints a correctness sweep).

use judgebench_core::avnet::{run_avnet, GroupParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fail::Failure;
use crate::scenario::SCHEMA;

pub fn cmd_avnet(
    preset: &str,
    n: usize,
    votes: &[u8],
    all: bool,
    seed: Option<u64>,
) -> Result<u8, Failure> {
    let gp = GroupParams::preset(preset)?;
    if gp.below_recommended_size() {
        eprintln!(
            "warning: group order q = {} is below 2^16; fine for demonstrations, \
             too small to hide anything",
            gp.q
        );
    }
    let judges = 2 * n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    if all {
        let mut results = Vec::new();
        let mut matching = 0u64;
        for mask in 0u32..1 << judges {
            let votes: Vec<bool> = (0..judges).map(|i| mask >> i & 1 == 1).collect();
            let majority = votes.iter().filter(|&&v| v).count() > judges / 2;
            let (verdict, _) = run_avnet(&gp, &votes, &mut rng)?;
            matching += u64::from(verdict == majority);
            results.push(serde_json::json!({
                "votes": votes.iter().map(|&v| if v { '1' } else { '0' }).collect::<String>(),
                "verdict": u8::from(verdict),
                "majority": u8::from(majority),
            }));
        }
        let vectors = 1u64 << judges;
        let summary = serde_json::json!({
            "schema": SCHEMA,
            "group": gp,
            "judges": judges,
            "vectors": vectors,
            "matching_majority": matching,
            "results": results,
        });
        println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
        Ok(u8::from(matching != vectors))
    } else {
        if votes.is_empty() {
            return Err(Failure::input("give --votes (one bit per judge) or --all"));
        }
        if votes.len() != judges {
            return Err(Failure::input(format!(
                "{} votes for a bench of {judges} judges (n = {n})",
                votes.len()
            )));
        }
        let votes: Vec<bool> = votes.iter().map(|&v| v == 1).collect();
        let (_, transcript) = run_avnet(&gp, &votes, &mut rng)?;
        println!(
            "{}",
            serde_json::to_string_pretty(&transcript).expect("transcript serializes")
        );
        Ok(0)
    }
}
