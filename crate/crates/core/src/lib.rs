//! Partition-wise regression and classification.
//!
//! A partition-wise model splits the predictor space into a grid of
//! axis-aligned regions, one threshold list per predictor, and fits a
//! separate linear, logistic or probit submodel in each region. The grid and
//! every region's variables are chosen by minimizing a two-part minimum
//! description length criterion: a greedy univariate scan proposes candidate
//! thresholds, a binary particle swarm searches subsets of them, and a final
//! pass tries dropping and nudging each selected threshold.
//!
//! ```no_run
//! use partwise::{fit, Dataset, FitParams, Task};
//!
//! let rows: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64 / 20.0]).collect();
//! let y = rows.iter().map(|x| if x[0] <= 5.0 { x[0] } else { 10.0 - x[0] }).collect();
//! let data = Dataset::from_rows(&rows, y).unwrap();
//! let outcome = fit(&data, Task::Regression, &FitParams::default()).unwrap();
//! println!("{:?}", outcome.model.config.thresholds(0));
//! ```

pub mod bpso;
pub mod cli;
pub mod data;
pub mod error;
pub mod fit;
pub mod io;
pub mod mdl;
pub mod model;
pub mod partition;
pub mod pipeline;
pub mod refine;
pub mod scan;
pub mod score;
pub mod sim;

pub use bpso::{run_bpso, BpsoOutcome, BpsoParams};
pub use data::{Dataset, Task};
pub use error::{Error, Result};
pub use fit::{fit_logistic, fit_ols, fit_probit, FitRequest, Mask, RegionFit};
pub use mdl::{mdl_binary, mdl_regression, MdlBreakdown};
pub use model::{FittedModel, Prediction, MODEL_VERSION};
pub use partition::{induce_partition, ChangePointConfig, CutTable, PartitionGrid};
pub use pipeline::{fit, FitOutcome, FitParams};
pub use refine::{final_adjust, select_features};
pub use scan::{scan_candidates, CandidateSet, ScanParams};
pub use score::Scorer;
pub use sim::{evaluate_trial, generate, SimSetting, TrialResult};
