//! Circuit -> Tseitin CNF -> restriction -> window -> signature
//! compression -> polynomial -> SPDP rank, with a collapse verdict
//! against `ceil(sqrt n)`.

mod circuit;
mod cnf;
mod run;
mod window;

pub use circuit::{Circuit, Gate, GateOp};
pub use cnf::{restrict_prune, tseitin, Cnf, Restricted};
pub use run::{
    collapse_threshold, deg3_circuit, default_kappa, family_label, goldreich_circuit, run_manifest, run_pipeline,
    runs_to_csv, Manifest, PipelineInput, PipelineParams, PipelineRun, CSV_HEADER,
};
pub use window::{
    canonicalize_profiles, clause_support, SignatureMode, extract_window, grow_window, window_budget, window_polynomial,
    ProfileClasses, Signature, WindowSelection,
};
