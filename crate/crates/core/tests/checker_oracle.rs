//! Cross-validation of the set-based checker against a naive per-state
//! evaluator, plus algebraic identities the operators must satisfy, all
//! over randomized models and formulas.

use judgebench_core::mck::{Checker, Formula};
use judgebench_testkit::{random_formula, random_model, NaiveChecker};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sat(checker: &mut Checker<'_>, f: &Formula) -> Vec<u32> {
    checker.satisfying_states(f).expect("generated formulas fit the model")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checker_matches_naive_evaluation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 18);
        let naive = NaiveChecker::new(&model);
        let mut checker = Checker::new(&model);
        for _ in 0..4 {
            let f = random_formula(&mut rng, model.agents(), 3);
            let fast = sat(&mut checker, &f);
            let slow: Vec<u32> = (0..model.state_count() as u32)
                .filter(|&s| naive.holds(&f, s))
                .collect();
            prop_assert_eq!(&fast, &slow, "disagree on {}", f);
        }
    }

    #[test]
    fn derived_operators_equal_their_definitions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 40);
        let mut checker = Checker::new(&model);
        let g = random_formula(&mut rng, model.agents(), 2);
        let h = random_formula(&mut rng, model.agents(), 2);
        let neg = |f: &Formula| Formula::not(f.clone());
        let pairs = vec![
            (Formula::af(g.clone()), neg(&Formula::eg(neg(&g)))),
            (Formula::ag(g.clone()), neg(&Formula::ef(neg(&g)))),
            (Formula::ax(g.clone()), neg(&Formula::ex(neg(&g)))),
            (
                Formula::ef(g.clone()),
                Formula::eu(Formula::truth(), g.clone()),
            ),
            (
                Formula::au(g.clone(), h.clone()),
                neg(&Formula::or(
                    Formula::eu(neg(&h), Formula::and(neg(&g), neg(&h))),
                    Formula::eg(neg(&h)),
                )),
            ),
        ];
        for (derived, definition) in pairs {
            prop_assert_eq!(
                sat(&mut checker, &derived),
                sat(&mut checker, &definition),
                "{} != {}",
                derived,
                definition
            );
        }
    }

    #[test]
    fn possibility_complements_knowledge(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 40);
        let mut checker = Checker::new(&model);
        let g = random_formula(&mut rng, model.agents(), 2);
        for agent in 0..model.agents() {
            let possible = sat(&mut checker, &Formula::possible(agent, g.clone()));
            let knows_not = sat(
                &mut checker,
                &Formula::knows(agent, Formula::not(g.clone())),
            );
            // P i g picks exactly the states where K i !g does not hold.
            let complement: Vec<u32> = (0..model.state_count() as u32)
                .filter(|s| !knows_not.contains(s))
                .collect();
            prop_assert_eq!(&possible, &complement, "agent {} on {}", agent, g);
        }
    }

    #[test]
    fn knowledge_sets_are_unions_of_observation_classes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 40);
        let mut checker = Checker::new(&model);
        let g = random_formula(&mut rng, model.agents(), 2);
        for agent in 0..model.agents() {
            for f in [
                Formula::knows(agent, g.clone()),
                Formula::possible(agent, g.clone()),
            ] {
                let states = sat(&mut checker, &f);
                for &s in &states {
                    let class = model.class_states(agent, model.obs_class(agent, s));
                    for t in class {
                        prop_assert!(
                            states.contains(t),
                            "{}: state {} in class of {} missing",
                            f,
                            t,
                            s
                        );
                    }
                }
            }
        }
    }
}
