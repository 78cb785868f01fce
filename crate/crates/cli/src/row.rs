//! Result rows and their CSV form.

use serde::Serialize;

use ladisc_core::solver::Status;

pub const HEADER: [&str; 8] = [
    "file",
    "approach",
    "lp_obj",
    "mip_dual_bound",
    "milp_obj",
    "milp_time",
    "total_lp_time",
    "ten_x",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    #[value(name = "la")]
    #[serde(rename = "la-disc")]
    LaDisc,
    Baseline,
}

impl Approach {
    pub fn label(self) -> &'static str {
        match self {
            Approach::LaDisc => "la-disc",
            Approach::Baseline => "baseline",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRow {
    pub file: String,
    pub approach: Approach,
    pub lp_obj: f64,
    pub mip_dual_bound: Option<f64>,
    pub milp_obj: Option<f64>,
    pub milp_time: Option<f64>,
    pub total_lp_time: f64,
    pub ten_x: Option<bool>,
    pub status: Option<Status>,
}

impl RunRow {
    pub fn optimal(&self) -> bool {
        self.status == Some(Status::Optimal)
    }

    pub fn csv_record(&self) -> [String; 8] {
        let one = |v: Option<f64>| v.filter(|x| x.is_finite()).map(|x| format!("{x:.1}")).unwrap_or_default();
        [
            self.file.clone(),
            self.approach.label().to_string(),
            one(Some(self.lp_obj)),
            one(self.mip_dual_bound),
            one(self.milp_obj),
            one(self.milp_time),
            one(Some(self.total_lp_time)),
            self.ten_x.map(|b| b.to_string()).unwrap_or_default(),
        ]
    }
}

/// Marks la-disc rows that solved to optimality at least ten times faster
/// than the baseline, or where the baseline did not finish.
pub fn set_ten_x(rows: &mut [RunRow]) {
    let baseline: Vec<(String, bool, f64)> = rows
        .iter()
        .filter(|r| r.approach == Approach::Baseline)
        .map(|r| (r.file.clone(), r.optimal(), r.milp_time.unwrap_or(f64::INFINITY)))
        .collect();
    for r in rows.iter_mut().filter(|r| r.approach == Approach::LaDisc) {
        let Some((_, b_opt, b_time)) = baseline.iter().find(|b| b.0 == r.file) else {
            continue;
        };
        let t = r.milp_time.unwrap_or(f64::INFINITY);
        r.ten_x = Some(r.optimal() && (!b_opt || *b_time >= 10.0 * t));
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[RunRow], w: W) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(HEADER)?;
    for r in rows {
        wr.write_record(r.csv_record())?;
    }
    wr.flush()?;
    Ok(())
}
