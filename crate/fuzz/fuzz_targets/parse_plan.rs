#![no_main]

use libfuzzer_sys::fuzz_target;
use zerodiag::planner::ConstructionPlan;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(plan) = ConstructionPlan::parse(text) {
        let printed = plan.to_string();
        assert_eq!(
            ConstructionPlan::parse(&printed).map(|p| p.to_string()),
            Ok(printed)
        );
    }
});
