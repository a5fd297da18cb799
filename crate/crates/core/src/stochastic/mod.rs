//! Path-level simulation: Ornstein–Uhlenbeck survival, amplitude events
//! and their counts, the subsequence LIL statistic and gap events.

mod amplitude;
mod gaps;
mod lil;
mod ou;

pub use amplitude::{amplitude_counting, walk_amplitude_event, AmplitudeCounts, AmplitudeWindow};
pub use gaps::{gap_event_prob, gap_statistics, m_sequence, GapStatistics};
pub use lil::{lil_subseq_statistic, subseq_normalizer, LilStatistic, Subsequence};
pub use ou::{
    ou_survival_curve, ou_survival_prob, ou_survival_refined, simulate_ou, Monitoring, OUPath,
    SurvivalCurve, SurvivalPoint,
};
