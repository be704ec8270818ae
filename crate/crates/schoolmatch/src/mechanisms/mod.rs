//! The three assignment mechanisms.
//!
//! * [`run_da`] — student-proposing deferred acceptance in batch rounds,
//!   returning the matching together with a complete round-by-round trace.
//! * [`run_cti`] — starts from deferred acceptance and keeps executing
//!   improvement cycles of the envy digraph until none remain, logging every
//!   trade. The result weakly improves every student over deferred
//!   acceptance and admits no further Pareto improvement.
//! * [`run_ttc_da`] — top trading cycles where each deferred acceptance seat
//!   is its holder's endowment.

mod cti;
mod da;
mod ttc;

pub use cti::{run_cti, CtiOutcome, TradeCycle, TradeMove};
pub use da::{run_da, DaOutcome, DaRound, DaTrace};
pub use ttc::{run_ttc_da, TtcOutcome};
