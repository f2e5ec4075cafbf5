//! Human-readable receiver descriptions.

#[derive(Debug, thiserror::Error)]
#[error("unknown receiver `{name}`, expected one of: {}", RECEIVERS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "))]
pub struct UnknownReceiver {
    pub name: String,
}

const RECEIVERS: [(&str, &str); 9] = [
    (
        "helstrom",
        "Helstrom bound for M-ary PPM with pure coherent pulses: the lowest error \
         any quantum measurement can reach. Closed form in M and N, no parameters, \
         no noise or loss.",
    ),
    (
        "dd",
        "Direct detection. Every slot gets the same real displacement and an on/off \
         detector; the decision is a uniformly random clicked slot, or any slot when \
         none clicked. Parameter: displacement (optimized over [-(sqrt(N)+5), sqrt(N)+5] \
         when not given). Closed-form error.",
    ),
    (
        "cpn",
        "Conditional pulse nulling. The hypothesized slot is displaced to null the \
         expected pulse; a click moves the hypothesis to the next slot, a no-click \
         switches to plain direct detection of the remaining slots, where any click \
         takes over the hypothesis. Parameter: nulling displacement (optimized when \
         not given). Closed-form error.",
    ),
    (
        "greedy",
        "Greedy receiver, one setting per slot. It keeps a hypothesis and a revision \
         ratio r (likelihood of the current slot over the hypothesis). Before each slot \
         it compares Option A (revise on a click) and Option B (revise on a no-click), \
         optimizing the setting for each, and keeps the better. The first slot's \
         setting is optimized for the final error. Classes: displacement, \
         displacement-gain, dolinar. Exact error by outcome enumeration.",
    ),
    (
        "greedy-displacement",
        "Greedy receiver with a real displacement per slot. See `greedy`.",
    ),
    (
        "greedy-displacement-gain",
        "Greedy receiver with displacement followed by phase-sensitive gain G in [1, 10]; \
         both are optimized jointly. See `greedy`.",
    ),
    (
        "greedy-dolinar",
        "Greedy receiver whose per-slot measurement has the click-parity statistics of \
         a Dolinar receiver tuned to an assumed prior, which is the optimized \
         parameter. Lossless, noiseless channels only. See `greedy`.",
    ),
    (
        "slicing-greedy",
        "Slicing greedy receiver. Each slot is split by a beamsplitter cascade into n \
         equal slices, each carrying N/n photons and N_d/n background. A posterior over \
         all slots is updated after every slice. With r = P(current slot) / max over \
         the other slots, Option A (revise on a click) is used when r <= 1 and Option B \
         (revise on a no-click) otherwise; the slice setting maximizes that option's \
         success weight. The decision is the posterior mode. Monte Carlo error unless \
         M*n is within the exact cap.",
    ),
    (
        "bayesian-dd-slicing",
        "Bayesian direct detection over n slices per slot: no displacement or gain, \
         posterior updated after every slice, decision is the posterior mode. Repeated \
         updates suppress the error floor that background clicks cause in unsliced \
         direct detection. Monte Carlo error unless M*n is within the exact cap.",
    ),
];

pub fn describe(name: &str) -> Result<&'static str, UnknownReceiver> {
    let key = name
        .strip_prefix("slicing-greedy-")
        .map_or(name, |_| "slicing-greedy");
    RECEIVERS
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, d)| *d)
        .ok_or_else(|| UnknownReceiver {
            name: name.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_and_unknown() {
        assert!(describe("cpn").unwrap().contains("null"));
        assert!(describe("slicing-greedy").unwrap().contains("Option A"));
        assert!(describe("slicing-greedy-displacement")
            .unwrap()
            .contains("Option B"));
        let err = describe("bogus").unwrap_err().to_string();
        assert!(
            err.contains("bogus") && err.contains("cpn") && err.contains("bayesian-dd-slicing")
        );
    }
}
