//! Core of the sign lookup system: the sign bank, the DTW matcher behind the
//! recognizer contract, upload intake, the annotation bridge and the
//! accuracy harness.

pub mod annotation;
pub mod artifact;
pub mod eval;
pub mod features;
pub mod intake;
pub mod matcher;
pub mod signbank;
pub mod synthetic;

pub use features::{FeatureSequence, Keypoint, PoseFrame};
pub use matcher::{CandidateList, QueryMode, Recognizer};
pub use signbank::Bank;
