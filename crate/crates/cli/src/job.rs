use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use sinkhorn_limit::algebra::{
    buchberger_with_limits, build_scaling_ideal, default_gauge, degree_bound, elimination_degree, observe_degree,
    GroebnerLimits, RationalInstance, RationalSampler,
};
use sinkhorn_limit::closedform::supports_shape;
use sinkhorn_limit::{
    closed_form_dispatch, extract_factors, residuals, sinkhorn_iterate, validate_instance, Error, GaugeFix, GaugeKind,
    IterationConfig, ScaledResult, ValidatedInstance, DEFAULT_CONSISTENCY_TOL,
};

use crate::error::{CliError, EXIT_DEFECT, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::input::{parse_input, LiteralInstance};
use crate::report::{
    CompareReport, FactorReport, InstanceDegreeReport, Report, ResidualReport, ShapeSweep, SolveReport, SweepReport,
};

/// Largest gap `compare` tolerates between the two routes.
pub const COMPARE_GAP: f64 = 1e-6;

/// Shapes covered by the `degree-check` sweep.
pub const SWEEP_SHAPES: [(usize, usize); 4] = [(1, 3), (2, 2), (2, 3), (2, 4)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scale,
    Factors,
    Compare,
    DegreeCheck,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Scale => "scale",
            Command::Factors => "factors",
            Command::Compare => "compare",
            Command::DegreeCheck => "degree-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Iterative,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// A gauge as written on the command line: `r,INDEX` or `c,INDEX`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaugeArg(pub GaugeFix);

impl FromStr for GaugeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (side, index) = s
            .split_once(',')
            .ok_or_else(|| format!("expected r,INDEX or c,INDEX, got {s:?}"))?;
        let index: usize = index.trim().parse().map_err(|_| format!("bad gauge index in {s:?}"))?;
        if index == 0 {
            return Err("gauge indices start at 1".into());
        }
        match side.trim() {
            "r" => Ok(GaugeArg(GaugeFix::row(index - 1))),
            "c" => Ok(GaugeArg(GaugeFix::col(index - 1))),
            _ => Err(format!("gauge side must be r or c, got {side:?}")),
        }
    }
}

pub fn gauge_label(g: GaugeFix) -> String {
    match g.kind {
        GaugeKind::UnitRowFactor => format!("r,{}", g.index + 1),
        GaugeKind::UnitColFactor => format!("c,{}", g.index + 1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub input: Option<PathBuf>,
    /// Marginals for CSV input.
    pub rows: Option<String>,
    pub cols: Option<String>,
    pub method: MethodChoice,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub gauge: Option<GaugeFix>,
    pub seed: u64,
    pub count: usize,
    pub format: OutputFormat,
    pub singularity_threshold: f64,
}

impl JobSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            rows: None,
            cols: None,
            method: MethodChoice::Auto,
            tolerance: 1e-9,
            max_iterations: 1000,
            gauge: None,
            seed: 42,
            count: 20,
            format: OutputFormat::Json,
            singularity_threshold: sinkhorn_limit::DEFAULT_SINGULARITY_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(CliError::Usage("--max-iters must be at least 1".into()));
        }
        if self.singularity_threshold.is_nan() || self.singularity_threshold < 0.0 {
            return Err(CliError::Usage("--singularity-threshold must be nonnegative".into()));
        }
        if self.command != Command::DegreeCheck && self.input.is_none() {
            return Err(CliError::Usage(format!(
                "{} needs an input file",
                self.command.as_str()
            )));
        }
        Ok(())
    }

    fn iteration_config(&self, track: bool) -> IterationConfig {
        let c = IterationConfig::default()
            .with_tolerance(self.tolerance)
            .with_max_iterations(self.max_iterations);
        if track {
            c.tracking_factors()
        } else {
            c
        }
    }

    fn literal(&self) -> Result<LiteralInstance, CliError> {
        let path = self.input.as_ref().expect("validated");
        parse_input(path, self.rows.as_deref(), self.cols.as_deref())
    }

    fn float_instance(&self) -> Result<ValidatedInstance, CliError> {
        let (a, m) = self.literal()?.to_float()?;
        Ok(validate_instance(a, m, DEFAULT_CONSISTENCY_TOL)?)
    }
}

/// A finished job: the report to print and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutcome {
    pub report: Report,
    pub exit_code: u8,
}

pub fn run_job(spec: &JobSpec) -> Result<JobOutcome, CliError> {
    spec.validate()?;
    match spec.command {
        Command::Scale | Command::Factors => solve(spec),
        Command::Compare => compare(spec),
        Command::DegreeCheck if spec.input.is_some() => degree_of_input(spec),
        Command::DegreeCheck => sweep(spec),
    }
}

/// Runs the requested route; a non-converged iterative run comes back as a
/// result with `converged == false`.
fn run_method(
    spec: &JobSpec,
    inst: &ValidatedInstance,
    method: MethodChoice,
    track: bool,
) -> Result<ScaledResult, CliError> {
    let (n, m) = inst.shape();
    let closed = match method {
        MethodChoice::ClosedForm => true,
        MethodChoice::Auto => supports_shape(n, m),
        MethodChoice::Iterative => false,
    };
    if closed {
        let r = closed_form_dispatch(inst, spec.singularity_threshold)?;
        // the singular-limit formula reads only the marginals, so it has no factors
        if !(track && r.factors.is_none() && method == MethodChoice::Auto) {
            return Ok(r);
        }
    }
    match sinkhorn_iterate(inst, &spec.iteration_config(track)) {
        Ok(r) => Ok(r),
        Err(Error::NotConverged { partial }) => Ok(*partial),
        Err(e) => Err(e.into()),
    }
}

fn solve_report(
    spec: &JobSpec,
    inst: &ValidatedInstance,
    r: &ScaledResult,
    command: Command,
) -> Result<SolveReport, CliError> {
    let res = residuals(&r.matrix, inst.marginals())?;
    let factors = if command == Command::Factors && r.converged {
        let (_, m) = inst.shape();
        let gauge = spec.gauge.unwrap_or_else(|| GaugeFix::last_col(m));
        let f = extract_factors(inst, r, gauge)?;
        Some(FactorReport {
            gauge: gauge_label(gauge),
            row: f.row_factors().to_vec(),
            col: f.col_factors().to_vec(),
        })
    } else {
        None
    };
    Ok(SolveReport {
        schema_version: crate::report::SCHEMA_VERSION,
        command: command.as_str(),
        method: r.method.as_str(),
        shape: [inst.shape().0, inst.shape().1],
        tolerance: spec.tolerance,
        converged: r.converged,
        iterations: r.iterations,
        max_marginal_residual: r.max_marginal_residual,
        matrix: r.matrix.to_rows(),
        residuals: ResidualReport {
            rows: res.rows,
            cols: res.cols,
        },
        factors,
    })
}

fn solve(spec: &JobSpec) -> Result<JobOutcome, CliError> {
    let inst = spec.float_instance()?;
    if let Some(g) = spec.gauge {
        g.check(inst.shape().0, inst.shape().1)?;
    }
    let track = spec.command == Command::Factors;
    let r = run_method(spec, &inst, spec.method, track)?;
    let report = solve_report(spec, &inst, &r, spec.command)?;
    if !r.converged {
        eprintln!(
            "not converged after {} sweeps (max marginal residual {:e})",
            r.iterations, r.max_marginal_residual
        );
    }
    Ok(JobOutcome {
        exit_code: if r.converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
        report: Report::Solve(report),
    })
}

fn compare(spec: &JobSpec) -> Result<JobOutcome, CliError> {
    let inst = spec.float_instance()?;
    let (n, m) = inst.shape();
    let iterative = run_method(spec, &inst, MethodChoice::Iterative, false)?;
    let closed = if supports_shape(n, m) {
        Some(run_method(spec, &inst, MethodChoice::ClosedForm, false)?)
    } else {
        None
    };
    let max_gap = closed.as_ref().map(|c| c.matrix.max_abs_diff(&iterative.matrix));
    let exit_code = if !iterative.converged {
        EXIT_NOT_CONVERGED
    } else if max_gap.is_some_and(|g| g.is_nan() || g > COMPARE_GAP) {
        EXIT_DEFECT
    } else {
        EXIT_OK
    };
    let report = CompareReport {
        schema_version: crate::report::SCHEMA_VERSION,
        command: Command::Compare.as_str(),
        shape: [n, m],
        allowed_gap: COMPARE_GAP,
        max_gap,
        iterative: solve_report(spec, &inst, &iterative, Command::Scale)?,
        closed_form: closed
            .as_ref()
            .map(|c| solve_report(spec, &inst, c, Command::Scale))
            .transpose()?,
    };
    if exit_code == EXIT_DEFECT {
        eprintln!(
            "{}",
            CliError::MethodGap {
                gap: max_gap.unwrap_or(f64::NAN),
                allowed: COMPARE_GAP
            }
        );
    }
    Ok(JobOutcome {
        report: Report::Compare(report),
        exit_code,
    })
}

fn degree_of_input(spec: &JobSpec) -> Result<JobOutcome, CliError> {
    let lit = spec.literal()?;
    if lit.rows == 0 || lit.cols == 0 {
        return Err(CliError::Usage("empty matrix".into()));
    }
    let gauge = spec.gauge.unwrap_or_else(|| default_gauge(lit.rows, lit.cols));
    let inst: RationalInstance = lit.to_rational(gauge)?;
    let basis = buchberger_with_limits(&build_scaling_ideal(&inst), &GroebnerLimits::default())?;
    let variable = basis.vars().last().cloned().unwrap_or_default();
    let degree = if basis.is_unit() {
        None
    } else {
        Some(elimination_degree(&basis, &variable)?)
    };
    let bound = degree_bound(lit.rows, lit.cols);
    let report = InstanceDegreeReport {
        schema_version: crate::report::SCHEMA_VERSION,
        command: Command::DegreeCheck.as_str(),
        shape: [lit.rows, lit.cols],
        gauge: gauge_label(gauge),
        variables: basis.vars().to_vec(),
        unit_ideal: basis.is_unit(),
        variable,
        degree,
        bound,
        basis: basis.polynomials().iter().map(ToString::to_string).collect(),
    };
    let exit_code = match degree {
        None => {
            eprintln!("{}", Error::UnitIdeal);
            crate::error::EXIT_INCONSISTENT
        }
        Some(d) if d as u64 > bound => EXIT_DEFECT,
        Some(_) => EXIT_OK,
    };
    Ok(JobOutcome {
        report: Report::InstanceDegree(report),
        exit_code,
    })
}

fn sweep(spec: &JobSpec) -> Result<JobOutcome, CliError> {
    // Instances are drawn serially from one seeded stream so the data do not
    // depend on the thread count; only the basis computations run in parallel.
    let mut sampler = RationalSampler::new(spec.seed);
    let mut jobs = Vec::new();
    for &(n, m) in &SWEEP_SHAPES {
        for _ in 0..spec.count {
            jobs.push(sampler.consistent(n, m, default_gauge(n, m))?);
        }
    }
    let limits = GroebnerLimits::default();
    let observed: Vec<_> = jobs.par_iter().map(|inst| observe_degree(inst, &limits)).collect();

    let mut shapes = Vec::new();
    let mut results = observed.into_iter();
    for &(rows, cols) in &SWEEP_SHAPES {
        let bound = degree_bound(rows, cols);
        let mut degrees = Vec::with_capacity(spec.count);
        for _ in 0..spec.count {
            degrees.push(results.next().expect("one result per job")?.degree);
        }
        let mut histogram = BTreeMap::new();
        for &d in &degrees {
            *histogram.entry(d).or_insert(0usize) += 1;
        }
        shapes.push(ShapeSweep {
            rows,
            cols,
            bound,
            at_bound: degrees.iter().filter(|&&d| d as u64 == bound).count(),
            above_bound: degrees.iter().filter(|&&d| d as u64 > bound).count(),
            histogram,
            degrees,
        });
    }
    let violation = shapes
        .iter()
        .find(|s| s.above_bound > 0)
        .map(|s| CliError::DegreeAboveBound {
            rows: s.rows,
            cols: s.cols,
            degree: *s.degrees.iter().max().unwrap(),
            bound: s.bound,
        });
    if let Some(v) = &violation {
        eprintln!("{v}");
    }
    Ok(JobOutcome {
        exit_code: if violation.is_some() { EXIT_DEFECT } else { EXIT_OK },
        report: Report::Sweep(SweepReport {
            schema_version: crate::report::SCHEMA_VERSION,
            command: Command::DegreeCheck.as_str(),
            seed: spec.seed,
            count: spec.count,
            shapes,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_arguments() {
        assert_eq!("c,2".parse::<GaugeArg>().unwrap().0, GaugeFix::col(1));
        assert_eq!("r, 1".parse::<GaugeArg>().unwrap().0, GaugeFix::row(0));
        for bad in ["c", "c,0", "x,1", "r,one"] {
            assert!(bad.parse::<GaugeArg>().is_err(), "{bad}");
        }
        assert_eq!(gauge_label(GaugeFix::col(1)), "c,2");
    }

    #[test]
    fn spec_validation() {
        let mut s = JobSpec::new(Command::DegreeCheck);
        assert!(s.validate().is_ok());
        s.tolerance = 0.0;
        assert!(s.validate().is_err());
        let mut s = JobSpec::new(Command::Scale);
        assert!(s.validate().is_err());
        s.input = Some("x.json".into());
        s.max_iterations = 0;
        assert!(s.validate().is_err());
    }
}
