//! The analysis model suite, written as data: each model names its
//! responses, fixed-effect columns and row filter. Every model has a random
//! intercept per trainee.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use coach_core::{Dataset, DatasetRow, ReportStatus};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::descriptive::moving_average;
use crate::design::RegressionDesign;
use crate::error::StatsError;
use crate::fit::{Family, MixedModelFit};
use crate::glmm::fit_glmm_logistic;
use crate::lmm::fit_lmm;

/// Window of the judgment moving average used by Model VIII.
pub const JUDGMENT_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Response {
    Reported,
    Completed,
    Success,
    Failure,
    Absent,
    Difficulty,
    SelfEfficacy,
    Affective,
    Instrumental,
}

impl Response {
    pub fn name(self) -> &'static str {
        match self {
            Response::Reported => "reported",
            Response::Completed => "completed",
            Response::Success => "success",
            Response::Failure => "failure",
            Response::Absent => "absent",
            Response::Difficulty => "difficulty",
            Response::SelfEfficacy => "self_efficacy",
            Response::Affective => "affective_attitude",
            Response::Instrumental => "instrumental_attitude",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Response::Difficulty | Response::SelfEfficacy | Response::Affective | Response::Instrumental => {
                Family::Gaussian
            }
            _ => Family::Binomial,
        }
    }

    fn value(self, row: &DatasetRow) -> Option<f64> {
        let bit = |b: bool| Some(if b { 1.0 } else { 0.0 });
        match self {
            Response::Reported => bit(row.reported()),
            Response::Completed | Response::Success => bit(row.status == ReportStatus::Success),
            Response::Failure => bit(row.status == ReportStatus::Failure),
            Response::Absent => bit(row.status == ReportStatus::Absent),
            Response::Difficulty => row.difficulty.map(f64::from),
            Response::SelfEfficacy => row.self_efficacy.map(f64::from),
            Response::Affective => row.affective.map(f64::from),
            Response::Instrumental => row.instrumental.map(f64::from),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    Day,
    DifficultyHard,
    /// Self-efficacy rated for the chosen behavior at enrolment.
    SelfEfficacy,
    Reminder7,
    Reminder14,
    /// Reminders acknowledged while active before the current day.
    AckedReminders,
    PriorSuccesses,
    PriorAbsents,
    PriorFailures,
    AvgDifficulty,
    AvgSelfEfficacy,
    AvgAffective,
    AvgInstrumental,
}

impl Predictor {
    pub fn name(self) -> &'static str {
        match self {
            Predictor::Day => "day",
            Predictor::DifficultyHard => "difficulty_hard",
            Predictor::SelfEfficacy => "self_efficacy",
            Predictor::Reminder7 => "reminder_7",
            Predictor::Reminder14 => "reminder_14",
            Predictor::AckedReminders => "n_reminders",
            Predictor::PriorSuccesses => "n_successes",
            Predictor::PriorAbsents => "n_absents",
            Predictor::PriorFailures => "n_failures",
            Predictor::AvgDifficulty => "avg_difficulty",
            Predictor::AvgSelfEfficacy => "avg_self_efficacy",
            Predictor::AvgAffective => "avg_affective_attitude",
            Predictor::AvgInstrumental => "avg_instrumental_attitude",
        }
    }

    fn value(self, row: &DatasetRow, f: &RowFeatures) -> Option<f64> {
        let c = &row.condition;
        let bit = |b: bool| Some(if b { 1.0 } else { 0.0 });
        match self {
            Predictor::Day => Some(f64::from(row.day)),
            Predictor::DifficultyHard => bit(c.difficulty_arm == coach_core::Arm::Hard),
            Predictor::SelfEfficacy => Some(f64::from(row.initial_self_efficacy)),
            Predictor::Reminder7 => bit(c.reminders_on && c.reminder_count == 7),
            Predictor::Reminder14 => bit(c.reminders_on && c.reminder_count == 14),
            Predictor::AckedReminders => Some(f64::from(f.acked_before)),
            Predictor::PriorSuccesses => Some(f64::from(f.successes_before)),
            Predictor::PriorAbsents => Some(f64::from(f.absents_before)),
            Predictor::PriorFailures => Some(f64::from(f.failures_before)),
            Predictor::AvgDifficulty => f.judgment_averages.map(|a| a[0]),
            Predictor::AvgSelfEfficacy => f.judgment_averages.map(|a| a[1]),
            Predictor::AvgAffective => f.judgment_averages.map(|a| a[2]),
            Predictor::AvgInstrumental => f.judgment_averages.map(|a| a[3]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFilter {
    All,
    /// Days without an actively acknowledged reminder.
    ReminderNotAcked,
}

impl RowFilter {
    fn keep(self, row: &DatasetRow) -> bool {
        match self {
            RowFilter::All => true,
            RowFilter::ReminderNotAcked => !row.reminder_acked,
        }
    }
}

/// Model selector as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

impl ModelId {
    pub const ALL: [ModelId; 8] =
        [ModelId::I, ModelId::II, ModelId::III, ModelId::IV, ModelId::V, ModelId::VI, ModelId::VII, ModelId::VIII];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::I => "I",
            ModelId::II => "II",
            ModelId::III => "III",
            ModelId::IV => "IV",
            ModelId::V => "V",
            ModelId::VI => "VI",
            ModelId::VII => "VII",
            ModelId::VIII => "VIII",
        }
    }

    /// Specs fitted for this selector. VII covers both the compliance and
    /// the judgment tables.
    pub fn specs(self) -> Vec<&'static ModelSpec> {
        SUITE.iter().filter(|s| s.id == self).collect()
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown model {s:?}; expected one of I..VIII or all"))
    }
}

#[derive(Debug)]
pub struct ModelSpec {
    pub id: ModelId,
    /// Key used in JSON output and table headers.
    pub key: &'static str,
    pub title: &'static str,
    pub responses: &'static [Response],
    pub predictors: &'static [Predictor],
    pub filter: RowFilter,
}

use Predictor as P;
use Response as R;

const COMPLIANCE: &[Response] = &[R::Reported, R::Completed];
const JUDGMENTS: &[Response] = &[R::Difficulty, R::SelfEfficacy, R::Affective, R::Instrumental];

pub static SUITE: [ModelSpec; 9] = [
    ModelSpec {
        id: ModelId::I,
        key: "I",
        title: "baseline",
        responses: COMPLIANCE,
        predictors: &[P::Day],
        filter: RowFilter::All,
    },
    ModelSpec {
        id: ModelId::II,
        key: "II",
        title: "assigned difficulty",
        responses: COMPLIANCE,
        predictors: &[P::Day, P::DifficultyHard],
        filter: RowFilter::All,
    },
    ModelSpec {
        id: ModelId::III,
        key: "III",
        title: "measured self-efficacy",
        responses: COMPLIANCE,
        predictors: &[P::Day, P::SelfEfficacy],
        filter: RowFilter::All,
    },
    ModelSpec {
        id: ModelId::IV,
        key: "IV",
        title: "reminder count",
        responses: COMPLIANCE,
        predictors: &[P::Day, P::Reminder7, P::Reminder14],
        filter: RowFilter::All,
    },
    ModelSpec {
        id: ModelId::V,
        key: "V",
        title: "reminder count, days without an acknowledged reminder",
        responses: COMPLIANCE,
        predictors: &[P::Day, P::Reminder7, P::Reminder14],
        filter: RowFilter::ReminderNotAcked,
    },
    ModelSpec {
        id: ModelId::VI,
        key: "VI",
        title: "acknowledged reminders so far, days without an acknowledged reminder",
        responses: COMPLIANCE,
        predictors: &[P::Day, P::AckedReminders],
        filter: RowFilter::ReminderNotAcked,
    },
    ModelSpec {
        id: ModelId::VII,
        key: "VII",
        title: "self-efficacy and reminders",
        responses: COMPLIANCE,
        predictors: &[P::Day, P::SelfEfficacy, P::Reminder7, P::Reminder14],
        filter: RowFilter::All,
    },
    ModelSpec {
        id: ModelId::VII,
        key: "VII-judgments",
        title: "judgments by prior outcomes",
        responses: JUDGMENTS,
        predictors: &[P::PriorSuccesses, P::PriorAbsents, P::PriorFailures],
        filter: RowFilter::All,
    },
    ModelSpec {
        id: ModelId::VIII,
        key: "VIII",
        title: "outcomes by recent judgments",
        responses: &[R::Success, R::Failure, R::Absent],
        predictors: &[P::AvgDifficulty, P::AvgSelfEfficacy, P::AvgAffective, P::AvgInstrumental],
        filter: RowFilter::All,
    },
];

/// History-dependent covariates of one dataset row.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RowFeatures {
    pub acked_before: u32,
    pub successes_before: u32,
    pub absents_before: u32,
    pub failures_before: u32,
    /// Trailing moving averages of the four judgments, taken at the most
    /// recent reported day before this one. `None` before the first report.
    pub judgment_averages: Option<[f64; 4]>,
}

/// Computes [`RowFeatures`] for every row, aligned with `dataset.rows`.
pub fn row_features(dataset: &Dataset) -> Result<Vec<RowFeatures>, StatsError> {
    let mut by_trainee: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in dataset.rows.iter().enumerate() {
        by_trainee.entry(&r.trainee_id).or_default().push(i);
    }
    let mut out = vec![RowFeatures::default(); dataset.len()];
    for idx in by_trainee.values_mut() {
        idx.sort_by_key(|&i| dataset.rows[i].day);
        let mut acc = RowFeatures::default();
        let mut series: [Vec<f64>; 4] = Default::default();
        for &i in idx.iter() {
            let row = &dataset.rows[i];
            out[i] = acc;
            if row.reminder_acked {
                acc.acked_before += 1;
            }
            match row.status {
                ReportStatus::Success => acc.successes_before += 1,
                ReportStatus::Failure => acc.failures_before += 1,
                ReportStatus::Absent => acc.absents_before += 1,
            }
            if let (Some(d), Some(s), Some(a), Some(n)) = (row.difficulty, row.self_efficacy, row.affective, row.instrumental) {
                for (k, v) in [d, s, a, n].into_iter().enumerate() {
                    series[k].push(f64::from(v));
                }
                let mut avg = [0.0; 4];
                for k in 0..4 {
                    avg[k] = *moving_average(&series[k], JUDGMENT_WINDOW)?.last().expect("non-empty series");
                }
                acc.judgment_averages = Some(avg);
            }
        }
    }
    Ok(out)
}

/// Builds the design for one response of a model. Rows where the response
/// or any predictor is undefined are dropped.
pub fn build_design(
    dataset: &Dataset,
    features: &[RowFeatures],
    spec: &ModelSpec,
    response: Response,
) -> Result<RegressionDesign, StatsError> {
    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); spec.predictors.len()];
    let mut groups = Vec::new();
    'rows: for (row, f) in dataset.rows.iter().zip(features) {
        if !spec.filter.keep(row) {
            continue;
        }
        let Some(v) = response.value(row) else { continue };
        let mut xs = Vec::with_capacity(spec.predictors.len());
        for p in spec.predictors {
            match p.value(row, f) {
                Some(x) => xs.push(x),
                None => continue 'rows,
            }
        }
        y.push(v);
        for (c, x) in cols.iter_mut().zip(xs) {
            c.push(x);
        }
        groups.push(row.trainee_id.as_str());
    }
    if y.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    let columns = spec.predictors.iter().map(|p| p.name().to_string()).zip(cols).collect();
    RegressionDesign::with_intercept(y, columns, &groups)
}

/// Fit (or failure) for one response column.
#[derive(Debug, Clone)]
pub struct ResponseFit {
    pub response: Response,
    pub n_obs: usize,
    pub result: Result<MixedModelFit, StatsError>,
}

impl Serialize for ResponseFit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.result {
            Ok(fit) => fit.serialize(s),
            Err(e) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("error", &e.to_string())?;
                m.end()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelResult {
    pub spec: &'static ModelSpec,
    pub fits: Vec<ResponseFit>,
}

impl ModelResult {
    pub fn fit(&self, response: Response) -> Option<&MixedModelFit> {
        self.fits.iter().find(|f| f.response == response).and_then(|f| f.result.as_ref().ok())
    }

    /// Text table: one row per predictor, one column per response.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "MODEL {} ({})", self.spec.key, self.spec.title);
        let label_w = self.spec.predictors.iter().map(|p| p.name().len()).max().unwrap_or(0).max(12);
        let col_w = self.fits.iter().map(|f| f.response.name().len()).max().unwrap_or(0).max(14);
        let _ = write!(out, "{:label_w$}", "");
        for f in &self.fits {
            let _ = write!(out, "  {:>col_w$}", f.response.name());
        }
        out.push('\n');
        let cell = |f: &ResponseFit, name: &str| match &f.result {
            Ok(fit) => fit
                .coefficient(name)
                .map(|c| format!("{:.3}{:<3}", c.estimate, c.stars))
                .unwrap_or_default(),
            Err(_) => "error".to_string(),
        };
        for p in self.spec.predictors {
            let _ = write!(out, "{:label_w$}", p.name());
            for f in &self.fits {
                let _ = write!(out, "  {:>col_w$}", cell(f, p.name()));
            }
            out.push('\n');
        }
        for (label, get) in [("R2m", 0usize), ("R2c", 1)] {
            let _ = write!(out, "{label:label_w$}");
            for f in &self.fits {
                let v = match &f.result {
                    Ok(fit) => format!("{:.3}   ", if get == 0 { fit.r2m } else { fit.r2c }),
                    Err(e) => format!("{}", e.code()),
                };
                let _ = write!(out, "  {v:>col_w$}");
            }
            out.push('\n');
        }
        let _ = write!(out, "{:label_w$}", "sigma2_group");
        for f in &self.fits {
            let v = f.result.as_ref().map_or_else(|_| String::new(), |fit| format!("{:.3}   ", fit.sigma_group2));
            let _ = write!(out, "  {v:>col_w$}");
        }
        out.push('\n');
        let _ = write!(out, "{:label_w$}", "n");
        for f in &self.fits {
            let _ = write!(out, "  {:>col_w$}", format!("{}   ", f.n_obs));
        }
        out.push('\n');
        out
    }
}

impl Serialize for ModelResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.fits.len()))?;
        for f in &self.fits {
            m.serialize_entry(f.response.name(), f)?;
        }
        m.end()
    }
}

fn fit_one(design: &RegressionDesign, response: Response) -> Result<MixedModelFit, StatsError> {
    match response.family() {
        Family::Gaussian => fit_lmm(design),
        Family::Binomial => fit_glmm_logistic(design),
    }
}

pub fn fit_spec(dataset: &Dataset, features: &[RowFeatures], spec: &'static ModelSpec) -> ModelResult {
    let fits = spec
        .responses
        .iter()
        .map(|&response| match build_design(dataset, features, spec, response) {
            Ok(design) => ResponseFit { response, n_obs: design.n_obs(), result: fit_one(&design, response) },
            Err(e) => ResponseFit { response, n_obs: 0, result: Err(e) },
        })
        .collect();
    ModelResult { spec, fits }
}

/// Fits the selected models (all when `selection` is empty).
pub fn fit_models(dataset: &Dataset, selection: &[ModelId]) -> Result<Vec<ModelResult>, StatsError> {
    if dataset.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    let features = row_features(dataset)?;
    let ids: Vec<ModelId> = if selection.is_empty() { ModelId::ALL.to_vec() } else { selection.to_vec() };
    Ok(ids
        .into_iter()
        .flat_map(|id| id.specs())
        .map(|spec| fit_spec(dataset, &features, spec))
        .collect())
}

/// JSON-ready map from model key to its per-response fits.
pub struct SuiteReport<'a>(pub &'a [ModelResult]);

impl Serialize for SuiteReport<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for r in self.0 {
            m.serialize_entry(r.spec.key, r)?;
        }
        m.end()
    }
}
