//! Worked example models shipped with the crate.

pub const LUNG: &str = include_str!("../corpus/lung.tb");
pub const HISTORY_WAR: &str = include_str!("../corpus/historywar.tb");
pub const LUCKY_DRAW: &str = include_str!("../corpus/luckydraw.tb");
pub const URN: &str = include_str!("../corpus/urn.tb");

/// `(file name, source)` for every corpus model.
pub const ALL: [(&str, &str); 4] = [
    ("lung.tb", LUNG),
    ("historywar.tb", HISTORY_WAR),
    ("luckydraw.tb", LUCKY_DRAW),
    ("urn.tb", URN),
];
