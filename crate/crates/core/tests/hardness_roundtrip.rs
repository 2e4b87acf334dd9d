//! The 3DM reduction composed with the exact matching oracle.

use proptest::prelude::*;

use twufp_core::exact::{exact_3dm, OracleLimits};
use twufp_core::gen::{random_3dm, random_3dm_k};
use twufp_core::hardness::{
    check_unique_sum, greedy_matching_lower_bound, matching_to_schedule, numbers_qk, reduce_3dm_to_spanufp,
    schedule_to_matching,
};
use twufp_core::instance::{check_schedule, solution_weight};
use twufp_core::io::{three_dm_from_json, three_dm_to_json};
use twufp_core::numeric::int;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn matchings_map_to_schedules_and_back(q in 1usize..4, extra in 0usize..4, seed in any::<u64>()) {
        let k = random_3dm(q, (q + extra).min(q * q * q), seed).unwrap();
        let (p, best) = exact_3dm(&k, &OracleLimits::default()).unwrap();
        let inst = reduce_3dm_to_spanufp(&k).unwrap();
        prop_assert!(inst.is_span());
        let sched = matching_to_schedule(&k, &best).unwrap();
        prop_assert!(check_schedule(&inst, &sched, &int(1)).unwrap().feasible);
        prop_assert_eq!(solution_weight(&inst, &sched).unwrap(), int((p + 7 * q) as u64));
        let mut back = schedule_to_matching(&k, &sched).unwrap();
        back.sort();
        let mut best = best;
        best.sort();
        prop_assert_eq!(back, best);
    }

    #[test]
    fn gadget_numbers_have_unique_sums(q in 1usize..4, seed in any::<u64>()) {
        let k = random_3dm(q, q, seed).unwrap();
        prop_assert!(check_unique_sum(&numbers_qk(&k), 64).unwrap().holds);
    }

    #[test]
    fn greedy_meets_its_bound(q in 1usize..12, k in 2usize..4, seed in any::<u64>()) {
        let inst = random_3dm_k(q, k, seed).unwrap();
        let inst = three_dm_from_json(&three_dm_to_json(&inst)).unwrap();
        let g = greedy_matching_lower_bound(&inst).unwrap();
        prop_assert!(inst.check_matching(&g).is_ok());
        prop_assert!(g.len() * (3 * k - 2) >= q);
    }
}
