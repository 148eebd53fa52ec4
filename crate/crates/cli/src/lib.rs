//! Command-line front end for the `zp3-core` drivers.
//!
//! Arguments are parsed into a [`RunConfig`] with every default resolved,
//! so a configuration prints to one canonical command line and parses
//! back to itself.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zp3_core::invariants::{InvariantRing, SpanExpr};
use zp3_core::report::{InstanceOutcome, Verdict, VerificationReport, Window};
use zp3_core::separating::{self, Point, Separation};
use zp3_core::verify::{self, Tier, VerifyOptions};
use zp3_core::{modp, zsum, Error, GroupSpec, ModuleSpec, ZSequence};

#[derive(Parser, Debug)]
#[command(name = "zp3", version, about = "Invariants of Z_p ⋊ Z_3: dimensions, degree bounds, separating sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// Prime with 3 | p - 1.
    #[arg(long, default_value_t = 7)]
    pub p: u32,
    /// Element of order 3 modulo p (default: the smallest).
    #[arg(long)]
    pub r: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RankArgs {
    #[arg(long = "rank-mode", value_enum, default_value_t = RankMode::Certified)]
    pub rank_mode: RankMode,
    /// Prime for the modular modes (default 1073741827).
    #[arg(long)]
    pub prime: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// dim I_d and dim R_d with the Burnside and transfer-rank cross-checks.
    Dims {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value = "V1")]
        module: String,
        #[arg(long, default_value_t = 1)]
        from: u32,
        #[arg(long = "max-degree", default_value_t = 12)]
        max_degree: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Windowed β_k: (R_+)_d against (R_+^{k+1})_d.
    Beta {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        module: Option<String>,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        from: Option<u32>,
        #[arg(long)]
        to: Option<u32>,
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, value_enum, default_value_t = TierArg::Standard)]
        tier: TierArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Zero-sum analysis of a sequence over Z_p.
    Zsum {
        #[arg(long, default_value_t = 7)]
        p: u32,
        /// Comma-separated residues, e.g. 1,1,3,5.
        #[arg(long, allow_hyphen_values = true)]
        seq: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dimension of a span expression such as `I+*R+<=7` degree by degree.
    Span {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value = "V1")]
        module: String,
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 1)]
        from: u32,
        #[arg(long, default_value_t = 10)]
        to: u32,
        #[command(flatten)]
        rank: RankArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Degree-bound statements on a window of degrees.
    Verify {
        #[arg(value_enum)]
        statement: Statement,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        module: Option<String>,
        #[arg(long)]
        from: Option<u32>,
        #[arg(long)]
        to: Option<u32>,
        /// Only used by `betak`.
        #[arg(long)]
        k: Option<u32>,
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, value_enum, default_value_t = TierArg::Standard)]
        tier: TierArg,
        /// Record expansion witnesses for exact memberships.
        #[arg(long)]
        witnesses: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Separating invariants.
    Sep {
        #[command(subcommand)]
        command: SepCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum SepCommand {
    /// The pair (1,1,0,0), (ω,1,0,0) on U1+V1 needs degree p+1.
    VerifyLower {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded random and structured pairs on the multiplicity-free module.
    VerifyUpper {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 200)]
        trials: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Orbit test and separator search for two points.
    Pair {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value = "U1+V1")]
        module: String,
        /// Coordinates such as `1,w,0,-2w^2`.
        #[arg(long, allow_hyphen_values = true)]
        v1: String,
        #[arg(long, allow_hyphen_values = true)]
        v2: String,
        /// Largest degree searched (default p + 1).
        #[arg(long)]
        dmax: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Relative invariants non-vanishing at seeded free points of V1.
    Relative {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Sum over all of G instead of B after projecting to A-invariants.
        #[arg(long = "full-group")]
        full_group: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RankMode {
    Exact,
    Modular,
    Certified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Tiny,
    Standard,
    Slow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Statement {
    Prop31,
    Cor32,
    Prop33,
    Exceptional,
    Betak,
    I3,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Self {
        match t {
            TierArg::Tiny => Tier::Tiny,
            TierArg::Standard => Tier::Standard,
            TierArg::Slow => Tier::Slow,
        }
    }
}

/// A fully resolved invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// `dims`, `verify prop31`, `sep pair`, ...
    pub subcommand: String,
    pub p: u32,
    pub r: Option<u32>,
    pub module: Option<String>,
    pub from: Option<u32>,
    pub to: Option<u32>,
    pub k: Option<u32>,
    pub trials: Option<u32>,
    pub seed: Option<u64>,
    pub rank_mode: Option<RankMode>,
    pub prime: Option<u64>,
    pub tier: Option<TierArg>,
    pub expr: Option<String>,
    pub seq: Option<String>,
    pub v1: Option<String>,
    pub v2: Option<String>,
    pub points: Option<usize>,
    pub witnesses: bool,
    pub full_group: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// A rejected invocation; `input` and `pos` locate parse errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub flag: String,
    pub input: Option<String>,
    pub pos: Option<usize>,
    pub msg: String,
}

impl UsageError {
    fn new(flag: &str, msg: impl Into<String>) -> Self {
        UsageError { flag: flag.into(), input: None, pos: None, msg: msg.into() }
    }

    fn from_core(flag: &str, input: &str, e: Error) -> Self {
        match e {
            Error::Parse { pos, msg } => UsageError { flag: flag.into(), input: Some(input.into()), pos: Some(pos), msg },
            other => UsageError { flag: flag.into(), input: Some(input.into()), pos: None, msg: other.to_string() },
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.pos, &self.input) {
            (Some(pos), Some(input)) => {
                writeln!(f, "error: invalid {} at position {pos}: {}", self.flag, self.msg)?;
                writeln!(f, "  {input}")?;
                write!(f, "  {}^", " ".repeat(input[..pos.min(input.len())].chars().count()))
            }
            (None, Some(input)) => write!(f, "error: invalid {} {input:?}: {}", self.flag, self.msg),
            _ => write!(f, "error: {}: {}", self.flag, self.msg),
        }
    }
}

fn group_of(p: u32, r: Option<u32>) -> Result<GroupSpec, UsageError> {
    match r {
        Some(r) => GroupSpec::with_r(p, r),
        None => GroupSpec::new(p),
    }
    .map_err(|e| UsageError::new("--p/--r", e.to_string()))
}

fn module_of(group: &GroupSpec, s: &str) -> Result<ModuleSpec, UsageError> {
    let m: ModuleSpec = s.parse().map_err(|e| UsageError::from_core("--module", s, e))?;
    m.validate(group).map_err(|e| UsageError::from_core("--module", s, e))?;
    Ok(m)
}

fn check_range(from: u32, to: u32) -> Result<(), UsageError> {
    if from > to {
        return Err(UsageError::new("--from/--to", format!("empty degree range {from}..{to}")));
    }
    Ok(())
}

impl RunConfig {
    fn blank(subcommand: &str, p: u32, r: Option<u32>, output: OutputArgs) -> Self {
        RunConfig {
            subcommand: subcommand.into(),
            p,
            r,
            module: None,
            from: None,
            to: None,
            k: None,
            trials: None,
            seed: None,
            rank_mode: None,
            prime: None,
            tier: None,
            expr: None,
            seq: None,
            v1: None,
            v2: None,
            points: None,
            witnesses: false,
            full_group: false,
            format: output.format,
            out: output.out,
        }
    }

    fn set_rank(&mut self, rank: RankArgs) -> Result<(), UsageError> {
        self.rank_mode = Some(rank.rank_mode);
        match (rank.rank_mode, rank.prime) {
            (RankMode::Exact, Some(_)) => return Err(UsageError::new("--prime", "not used with --rank-mode exact")),
            (RankMode::Exact, None) => {}
            (_, prime) => {
                let prime = prime.unwrap_or_else(modp::default_prime);
                if !modp::is_prime(prime) || prime % 3 != 1 {
                    return Err(UsageError::new("--prime", format!("{prime} is not a prime congruent to 1 mod 3")));
                }
                self.prime = Some(prime);
            }
        }
        Ok(())
    }

    /// Validates the arguments and fills in every default.
    pub fn resolve(cli: Cli) -> Result<Self, UsageError> {
        let cfg = match cli.command {
            Command::Dims { group, module, from, max_degree, output } => {
                let g = group_of(group.p, group.r)?;
                let m = module_of(&g, &module)?;
                check_range(from, max_degree)?;
                let mut c = Self::blank("dims", group.p, group.r, output);
                c.module = Some(m.to_string());
                c.from = Some(from);
                c.to = Some(max_degree);
                c
            }
            Command::Beta { group, module, k, from, to, rank, tier, output } => {
                Self::resolve_verify("beta", Statement::Betak, group, module, from, to, Some(k), rank, tier, false, output)?
            }
            Command::Zsum { p, seq, output } => {
                let s = ZSequence::parse(p, &seq).map_err(|e| UsageError::from_core("--seq", &seq, e))?;
                if p < 2 || !modp::is_prime(p as u64) {
                    return Err(UsageError::new("--p", format!("{p} is not prime")));
                }
                if s.len() > zsum::ENUMERATION_GUARD {
                    return Err(UsageError::new("--seq", format!("length {} exceeds {}", s.len(), zsum::ENUMERATION_GUARD)));
                }
                let mut c = Self::blank("zsum", p, None, output);
                c.seq = Some(s.elements().iter().map(u32::to_string).collect::<Vec<_>>().join(","));
                c
            }
            Command::Span { group, module, expr, from, to, rank, output } => {
                let g = group_of(group.p, group.r)?;
                let m = module_of(&g, &module)?;
                let e: SpanExpr = expr.parse().map_err(|e| UsageError::from_core("--expr", &expr, e))?;
                check_range(from, to)?;
                let mut c = Self::blank("span", group.p, group.r, output);
                c.module = Some(m.to_string());
                c.expr = Some(e.to_string());
                c.from = Some(from);
                c.to = Some(to);
                c.set_rank(rank)?;
                c
            }
            Command::Verify { statement, group, module, from, to, k, rank, tier, witnesses, output } => {
                let name = format!("verify {}", value_name(&statement));
                if k.is_some() && statement != Statement::Betak {
                    return Err(UsageError::new("--k", "only used by `verify betak`"));
                }
                Self::resolve_verify(&name, statement, group, module, from, to, k, rank, tier, witnesses, output)?
            }
            Command::Sep { command } => match command {
                SepCommand::VerifyLower { group, output } => {
                    group_of(group.p, group.r)?;
                    Self::blank("sep verify-lower", group.p, group.r, output)
                }
                SepCommand::VerifyUpper { group, trials, seed, output } => {
                    group_of(group.p, group.r)?;
                    let mut c = Self::blank("sep verify-upper", group.p, group.r, output);
                    c.trials = Some(trials);
                    c.seed = Some(seed);
                    c
                }
                SepCommand::Pair { group, module, v1, v2, dmax, output } => {
                    let g = group_of(group.p, group.r)?;
                    let m = module_of(&g, &module)?;
                    let dim = m.dim();
                    let n = 3 * g.p;
                    for (flag, s) in [("--v1", &v1), ("--v2", &v2)] {
                        let pt = Point::parse(n, s).map_err(|e| UsageError::from_core(flag, s, e))?;
                        if pt.dim() != dim {
                            return Err(UsageError::new(flag, format!("{} coordinates given, module {m} has dimension {dim}", pt.dim())));
                        }
                    }
                    let mut c = Self::blank("sep pair", group.p, group.r, output);
                    c.module = Some(m.to_string());
                    c.v1 = Some(v1.split(',').map(str::trim).collect::<Vec<_>>().join(","));
                    c.v2 = Some(v2.split(',').map(str::trim).collect::<Vec<_>>().join(","));
                    c.to = Some(dmax.unwrap_or(g.p + 1));
                    c
                }
                SepCommand::Relative { group, points, seed, full_group, output } => {
                    group_of(group.p, group.r)?;
                    let mut c = Self::blank("sep relative", group.p, group.r, output);
                    c.points = Some(points);
                    c.seed = Some(seed);
                    c.full_group = full_group;
                    c
                }
            },
        };
        Ok(cfg)
    }

    #[allow(clippy::too_many_arguments)]
    fn resolve_verify(
        name: &str,
        statement: Statement,
        group: GroupArgs,
        module: Option<String>,
        from: Option<u32>,
        to: Option<u32>,
        k: Option<u32>,
        rank: RankArgs,
        tier: TierArg,
        witnesses: bool,
        output: OutputArgs,
    ) -> Result<Self, UsageError> {
        let g = group_of(group.p, group.r)?;
        let stmt = value_name(&statement);
        let k = if statement == Statement::Betak { Some(k.unwrap_or(1)) } else { None };
        if k == Some(0) {
            return Err(UsageError::new("--k", "must be positive"));
        }
        if tier != TierArg::Slow && (g.p >= 13 || k.unwrap_or(1) >= 2) {
            return Err(UsageError::new("--tier", "p >= 13 and k >= 2 runs require --tier slow"));
        }
        if statement == Statement::Exceptional && g.p != 7 {
            return Err(UsageError::new("--p", "the exceptional case exists only for p = 7"));
        }
        let m = match &module {
            Some(s) => module_of(&g, s)?,
            None => verify::default_module(&stmt, tier.into(), &g).map_err(|e| UsageError::new("--module", e.to_string()))?,
        };
        if statement == Statement::Exceptional {
            let fixed = verify::default_module(&stmt, tier.into(), &g).expect("known statement");
            let (df, dt) = verify::default_window(&stmt, g.p, 1);
            if m != fixed || from.is_some_and(|d| d != df) || to.is_some_and(|d| d != dt) {
                return Err(UsageError::new("--module/--from/--to", format!("the exceptional case runs on {fixed} in degree {df}")));
            }
        }
        if matches!(statement, Statement::Prop31 | Statement::Cor32 | Statement::Prop33) && m.has_one_dim() {
            return Err(UsageError::new("--module", format!("{m} has one-dimensional summands")));
        }
        let (df, dt) = verify::default_window(&stmt, g.p, k.unwrap_or(1));
        let (from, to) = (from.unwrap_or(df), to.unwrap_or(dt));
        check_range(from, to)?;
        let mut c = Self::blank(name, group.p, group.r, output);
        c.module = Some(m.to_string());
        c.from = Some(from);
        c.to = Some(to);
        c.k = k;
        c.tier = Some(tier);
        c.witnesses = witnesses;
        c.set_rank(rank)?;
        Ok(c)
    }

    /// Parses a command line (without the program name).
    pub fn parse(line: &str) -> Result<Self, UsageError> {
        let words = shlex::split(line).ok_or_else(|| UsageError::new("command line", "unbalanced quotes"))?;
        Self::from_args(std::iter::once("zp3".to_string()).chain(words))
    }

    pub fn from_args<I: IntoIterator<Item = String>>(args: I) -> Result<Self, UsageError> {
        let cli = Cli::try_parse_from(args).map_err(|e| UsageError::new("arguments", e.to_string()))?;
        Self::resolve(cli)
    }

    /// The canonical command line; [`RunConfig::parse`] inverts it.
    pub fn canonical(&self) -> String {
        let mut w: Vec<String> = self.subcommand.split(' ').map(String::from).collect();
        let mut flag = |name: &str, v: Option<String>| {
            if let Some(v) = v {
                w.push(format!("--{name}"));
                w.push(v);
            }
        };
        flag("p", Some(self.p.to_string()));
        flag("r", self.r.map(|r| r.to_string()));
        flag("module", self.module.clone());
        flag("expr", self.expr.clone());
        flag("seq", self.seq.clone());
        flag("v1", self.v1.clone());
        flag("v2", self.v2.clone());
        match self.subcommand.as_str() {
            "dims" => flag("max-degree", self.to.map(|d| d.to_string())),
            "sep pair" => flag("dmax", self.to.map(|d| d.to_string())),
            _ => {}
        }
        flag("from", if self.subcommand == "sep pair" { None } else { self.from.map(|d| d.to_string()) });
        if self.subcommand != "dims" && self.subcommand != "sep pair" {
            flag("to", self.to.map(|d| d.to_string()));
        }
        flag("k", self.k.map(|k| k.to_string()));
        flag("trials", self.trials.map(|t| t.to_string()));
        flag("points", self.points.map(|t| t.to_string()));
        flag("seed", self.seed.map(|s| s.to_string()));
        flag("rank-mode", self.rank_mode.map(|m| value_name(&m)));
        flag("prime", self.prime.map(|q| q.to_string()));
        flag("tier", self.tier.map(|t| value_name(&t)));
        flag("format", Some(value_name(&self.format)));
        flag("out", self.out.as_ref().map(|o| o.display().to_string()));
        if self.witnesses {
            w.push("--witnesses".into());
        }
        if self.full_group {
            w.push("--full-group".into());
        }
        shlex::try_join(w.iter().map(String::as_str)).expect("no NUL bytes in arguments")
    }

    fn group(&self) -> GroupSpec {
        group_of(self.p, self.r).expect("validated")
    }

    fn module_spec(&self) -> ModuleSpec {
        self.module.as_deref().expect("resolved").parse().expect("validated")
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions { prime: self.prime, witnesses: self.witnesses }
    }
}

/// Runs a resolved configuration.
pub fn execute(cfg: &RunConfig) -> zp3_core::Result<VerificationReport> {
    let t0 = Instant::now();
    let g = cfg.group();
    let mut rep = match cfg.subcommand.as_str() {
        "dims" => dims_report(&g, &cfg.module_spec(), cfg.from.unwrap(), cfg.to.unwrap())?,
        "zsum" => zsum_report(cfg.p, cfg.seq.as_deref().unwrap())?,
        "span" => span_report(&g, &cfg.module_spec(), cfg.expr.as_deref().unwrap(), cfg.from.unwrap(), cfg.to.unwrap(), cfg.prime)?,
        "beta" | "verify betak" => verify::verify_betak(&g, &cfg.module_spec(), cfg.k.unwrap(), cfg.from.unwrap(), cfg.to.unwrap(), &cfg.verify_options())?,
        "verify prop31" => verify::verify_prop31(&g, &cfg.module_spec(), cfg.from.unwrap(), cfg.to.unwrap(), &cfg.verify_options())?,
        "verify cor32" => verify::verify_cor32(&g, &cfg.module_spec(), cfg.from.unwrap(), cfg.to.unwrap(), &cfg.verify_options())?,
        "verify prop33" => verify::verify_prop33(&g, &cfg.module_spec(), cfg.from.unwrap(), cfg.to.unwrap(), &cfg.verify_options())?,
        "verify exceptional" => verify::exceptional_case(&g, &cfg.verify_options())?,
        "verify i3" => verify::verify_i3(&g, &cfg.module_spec(), cfg.from.unwrap(), cfg.to.unwrap(), &cfg.verify_options())?,
        "sep verify-lower" => separating::verify_sep_lower(&g)?,
        "sep verify-upper" => separating::verify_sep_upper_random(&g, cfg.trials.unwrap(), cfg.seed.unwrap())?,
        "sep pair" => pair_report(&g, &cfg.module_spec(), cfg.v1.as_deref().unwrap(), cfg.v2.as_deref().unwrap(), cfg.to.unwrap())?,
        "sep relative" => separating::verify_relative_invariants(&g, cfg.points.unwrap(), cfg.seed.unwrap(), cfg.full_group)?,
        other => unreachable!("unresolved subcommand {other}"),
    };
    if cfg.subcommand == "beta" {
        rep.statement = "beta".into();
    }
    let mut canonical = cfg.clone();
    canonical.format = Format::Json;
    canonical.out = None;
    rep.params.insert("invocation".into(), Value::from(canonical.canonical()));
    rep.timing_ms = t0.elapsed().as_millis() as u64;
    Ok(rep)
}

/// `dim I_d`, `dim R_d` by enumeration, against the counting DP, the
/// Burnside formula and the rank of the transfer image.
pub fn dims_report(g: &GroupSpec, module: &ModuleSpec, from: u32, to: u32) -> zp3_core::Result<VerificationReport> {
    let ring = InvariantRing::new(g, module)?;
    let mut rep = VerificationReport::new("dims", Window { from, to })
        .param("p", g.p)
        .param("r", g.r)
        .param("module", module.to_string());
    for d in from..=to {
        let dim_i = ring.dim_i(d);
        let dim_r = ring.dim_r(d);
        let count = ring.count_a_invariant(d);
        let oracle = ring.burnside_dim(d);
        let tau_rank = ring.tau_image_rank(d);
        let ok = dim_i as u64 == count && dim_r == oracle && tau_rank == oracle;
        rep.instances.push(InstanceOutcome {
            monomial: format!("degree {d}"),
            degree: d,
            outcome: format!("dimI={dim_i} dimR={dim_r}"),
            mode: "exact".into(),
            status: if ok { Verdict::Pass } else { Verdict::Fail },
            certificate: Some(json!({
                "dim_i": dim_i,
                "dim_r": dim_r,
                "oracle": oracle,
                "tau_rank": tau_rank,
                "count_dp": count,
            })),
        });
    }
    rep.finish();
    Ok(rep)
}

pub fn zsum_report(p: u32, seq: &str) -> zp3_core::Result<VerificationReport> {
    let s = ZSequence::parse(p, seq)?;
    let class = zsum::classify(&s)?;
    let fact = zsum::factor_irreducible(&s)?;
    let lemma = zsum::lemma_easy_check(&s).ok();
    let bal = zsum::balandraud_bound(&s);
    let fs = zsum::freeze_smith_bound(&s);
    let sigma = zsum::sigma(&s);
    let ok = lemma.as_ref().is_none_or(|l| l.bound_holds && l.structure_holds) && (!bal.applicable || bal.holds) && (!fs.applicable || fs.holds);
    let outcome = if class.irreducible_zero_sum {
        "irreducible-zero-sum"
    } else if class.zero_sum {
        "zero-sum"
    } else if class.zero_sum_free {
        "zero-sum-free"
    } else {
        "other"
    };
    let mut rep = VerificationReport::new("zsum", Window { from: s.len() as u32, to: s.len() as u32 }).param("p", p).param("seq", seq);
    rep.instances.push(InstanceOutcome {
        monomial: s.to_string(),
        degree: s.len() as u32,
        outcome: outcome.into(),
        mode: "exact".into(),
        status: if ok { Verdict::Pass } else { Verdict::Fail },
        certificate: Some(json!({
            "zero_sum": class.zero_sum,
            "zero_sum_free": class.zero_sum_free,
            "irreducible": class.irreducible_zero_sum,
            "height": class.height,
            "sigma_size": sigma.len(),
            "sigma": sigma,
            "factors": fact.factors.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "remainder": fact.remainder.to_string(),
            "lemma": lemma,
            "balandraud": bal,
            "freeze_smith": fs,
        })),
    });
    rep.finish();
    Ok(rep)
}

pub fn span_report(g: &GroupSpec, module: &ModuleSpec, expr: &str, from: u32, to: u32, prime: Option<u64>) -> zp3_core::Result<VerificationReport> {
    let ring = InvariantRing::new(g, module)?;
    let e = SpanExpr::from_str(expr)?;
    let mut rep = VerificationReport::new("span", Window { from, to })
        .param("p", g.p)
        .param("r", g.r)
        .param("module", module.to_string())
        .param("expr", e.to_string());
    let mode = match prime {
        Some(q) => format!("modular({q})"),
        None => "exact".into(),
    };
    for d in from..=to {
        let dim = ring.span_dim(&e, d, prime)?;
        let ambient = if e.is_pure_r() { ring.dim_r(d) } else { ring.dim_i(d) };
        rep.instances.push(InstanceOutcome {
            monomial: format!("degree {d}"),
            degree: d,
            outcome: format!("dim={dim} ambient={ambient}"),
            mode: mode.clone(),
            status: Verdict::Finding,
            certificate: Some(json!({ "dim": dim, "ambient": ambient })),
        });
    }
    rep.finish();
    Ok(rep)
}

pub fn pair_report(g: &GroupSpec, module: &ModuleSpec, v1: &str, v2: &str, dmax: u32) -> zp3_core::Result<VerificationReport> {
    let ring = InvariantRing::new(g, module)?;
    let n = 3 * g.p;
    let (a, b) = (Point::parse(n, v1)?, Point::parse(n, v2)?);
    let cert = separating::separate_pair(&ring, &a, &b, dmax)?;
    let checked = cert.check(&ring)?;
    let (outcome, degree, status) = match &cert.verdict {
        Separation::SameOrbit(_) => ("same-orbit", 0, Verdict::Pass),
        Separation::Separated { degree, .. } => ("separated", *degree, Verdict::Pass),
        Separation::Inconclusive => ("inconclusive", dmax, Verdict::Finding),
    };
    let mut rep = VerificationReport::new("sep-pair", Window { from: 1, to: dmax })
        .param("p", g.p)
        .param("r", g.r)
        .param("module", module.to_string())
        .param("v1", a.display())
        .param("v2", b.display());
    rep.instances.push(InstanceOutcome {
        monomial: "pair".into(),
        degree,
        outcome: outcome.into(),
        mode: "modular-screen+exact".into(),
        status: if checked { status } else { Verdict::Fail },
        certificate: Some(cert.to_json(&ring)),
    });
    rep.finish();
    Ok(rep)
}

fn csv_field(v: Option<&Value>) -> String {
    match v {
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

/// JSON is canonical; csv and text are projections of it.
pub fn render(rep: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => rep.to_json() + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if rep.statement == "dims" {
                w.write_record(["d", "dimI", "dimR", "oracle"]).unwrap();
                for i in &rep.instances {
                    let c = i.certificate.as_ref();
                    let get = |k: &str| csv_field(c.and_then(|c| c.get(k)));
                    w.write_record([i.degree.to_string(), get("dim_i"), get("dim_r"), get("oracle")]).unwrap();
                }
            } else {
                w.write_record(["statement", "degree", "monomial", "outcome", "mode", "status"]).unwrap();
                for i in &rep.instances {
                    w.write_record([rep.statement.clone(), i.degree.to_string(), i.monomial.clone(), i.outcome.clone(), i.mode.clone(), i.status.to_string()])
                        .unwrap();
                }
            }
            String::from_utf8(w.into_inner().unwrap()).unwrap()
        }
        Format::Text => {
            let mut out = format!("{}: {} ({} instances, {} ms)\n", rep.statement, rep.verdict, rep.instances.len(), rep.timing_ms);
            for (k, v) in &rep.params {
                out += &format!("  {k} = {}\n", csv_field(Some(v)));
            }
            for i in &rep.instances {
                out += &format!("  [{}] d={} {}: {} ({})\n", i.status, i.degree, i.monomial, i.outcome, i.mode);
                if rep.statement == "zsum" {
                    if let Some(Value::Object(c)) = &i.certificate {
                        for (k, v) in c {
                            out += &format!("    {k}={}\n", csv_field(Some(v)));
                        }
                    }
                }
            }
            out
        }
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass | Verdict::Finding => 0,
        Verdict::Fail => 1,
    }
}
