//! Correlation-network minimal spanning trees over rolling windows of asset
//! prices, with the observables used to track structural phase changes:
//! power-law degree fits, mean occupation layer, degree and efficient
//! entropies, dragon-king detection and phase labelling.
//!
//! The pipeline for one window is
//! [`ingest`] → [`correlation`] → [`mst`] → [`metrics`] → [`phase`];
//! [`scan`] drives it over a whole panel and [`synth`] produces test markets.

pub mod correlation;
pub mod error;
pub mod export;
pub mod fmt;
pub mod ingest;
pub mod metrics;
pub mod mst;
pub mod phase;
pub mod report;
pub mod scan;
pub mod synth;

pub use correlation::{pearson_matrix, to_distance, CorrelationMatrix, DistanceMatrix};
pub use error::{Error, Result};
pub use ingest::{
    load_price_panel, log_returns, log_returns_detrended, window_survivors, PricePanel,
    ReturnPanel, Window,
};
pub use metrics::{
    central_vertex, degree_distribution, degree_entropy, degree_gaps, efficient_entropy,
    fit_power_law, mean_occupation_layer, mean_tree_length, DegreeDistribution, FitRange,
    PowerLawFit, WindowMetrics,
};
pub use mst::{degrees, kruskal_mst, levels, prim_mst, Edge, Tree};
pub use phase::{
    classify, detect_dragon_king, transitions, DragonKing, PhaseKind, PhaseLabel,
    PhaseThresholds, TransitionEvent,
};
pub use scan::{
    absolute_minimum, coincidence_interval, run_scan, run_scan_with, Execution, ScanConfig,
    ScanSeries, ScanWindow,
};
pub use synth::{gen_factor_market, gen_pa_tree, inject_superhub, FactorMarketSpec, SuperhubInjection};
