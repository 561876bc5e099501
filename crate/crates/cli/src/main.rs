use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lilypad::chain::{self, gamma_curve, parse_ratio, speeds_reduced, ChainSolution, Scalar, SolveOptions};
use lilypad::lcs::{lcs_banded, lcs_bitparallel, lcs_heuristic, lcs_periodic, BandSchedule};
use lilypad::montecarlo::{
    default_use_heuristic, delta_samples, estimate_gamma, estimate_gamma_cs, estimate_speeds, ExperimentConfig,
    LcsMethod, Report, SummaryStats,
};
use lilypad::signed::{self, coupled_run, margins_bruteforce, margins_formula};
use lilypad::{BigRational, Error, Word};

#[derive(Parser)]
#[command(name = "lilypad", version, about = "LCS against periodic words via frog dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// LCS of two words.
    Lcs(LcsArgs),
    /// LCS(R, W^(x)) through the frog dynamics.
    PeriodicLcs(PeriodicArgs),
    /// gamma_W at one rho, or the whole curve.
    Gamma(GammaArgs),
    /// Frog speeds s_1 < ... < s_k.
    Speeds(SpeedsArgs),
    /// tau_W at one rho, or at every breakpoint.
    Tau(TauArgs),
    /// Conditional law of frog m given frogs 0..m, for W = 0 1 ... k-1.
    Margins(MarginsArgs),
    /// Superadditivity gap statistics for random word pairs.
    Delta(DeltaArgs),
    /// LCS(R, R')/n for random word pairs.
    CsEstimate(CsArgs),
    /// Exhaustive checks of the signed-frog chain on a ring of k pads.
    SignedCheck(SignedArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Default, PartialEq, ValueEnum)]
enum Method {
    #[default]
    Exact,
    Reduced,
    Montecarlo,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Band {
    Auto,
    Exact,
    Fixed(usize),
}

fn parse_band(s: &str) -> Result<Band, String> {
    match s {
        "auto" => Ok(Band::Auto),
        "exact" => Ok(Band::Exact),
        _ => s.parse().map(Band::Fixed).map_err(|_| format!("expected auto, exact or a band width, got {s:?}")),
    }
}

fn parse_rho(s: &str) -> Result<BigRational, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct WordArgs {
    /// The periodic word W, one symbol per character.
    #[arg(long)]
    word: String,
    /// Alphabet size; defaults to the number of distinct symbols.
    #[arg(long)]
    alphabet: Option<usize>,
}

impl WordArgs {
    fn parse(&self) -> Result<Word, Error> {
        Word::parse(&self.word, self.alphabet)
    }
}

#[derive(Args)]
struct SamplingArgs {
    /// Length of each random word.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl SamplingArgs {
    fn config(&self, n: usize, trials: usize, alphabet: usize) -> ExperimentConfig {
        ExperimentConfig::new(self.seed, self.trials.unwrap_or(trials), self.n.unwrap_or(n), alphabet)
            .with_threads(self.threads)
    }
}

#[derive(Args)]
struct LcsArgs {
    v: String,
    w: String,
    #[arg(long)]
    alphabet: Option<usize>,
    #[arg(long, value_parser = parse_band, default_value = "exact")]
    band: Band,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct PeriodicArgs {
    #[command(flatten)]
    word: WordArgs,
    /// The word R.
    r: String,
    /// Prefix length x of W repeated; defaults to |R|.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct GammaArgs {
    #[command(flatten)]
    word: WordArgs,
    /// Ratio p/q; omit for the whole curve.
    #[arg(long, value_parser = parse_rho)]
    rho: Option<BigRational>,
    #[arg(long, value_enum, default_value_t)]
    method: Method,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SpeedsArgs {
    #[command(flatten)]
    word: WordArgs,
    #[arg(long, value_enum, default_value_t)]
    method: Method,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TauArgs {
    #[command(flatten)]
    word: WordArgs,
    #[arg(long, value_parser = parse_rho)]
    rho: Option<BigRational>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct MarginsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: usize,
    /// Comma-separated l_1 > ... > l_{m+1}; omit for every window with l_{m+1} = 0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    positions: Option<Vec<i64>>,
    /// Run the coupled chain for this many steps instead.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DeltaArgs {
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    #[arg(long, value_parser = parse_band, default_value = "auto")]
    band: Band,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CsArgs {
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SignedArgs {
    #[arg(long)]
    k: usize,
    /// Number of positive frogs; omit to check every size up to 3.
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Alphabet(_) | Error::SymbolRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

fn render(format: Format, value: Value, csv: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&value).expect("json value serializes"),
        Format::Csv => csv(),
    }
}

fn scalars(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::to_string).collect()
}

fn stats_csv(s: &SummaryStats) -> String {
    format!("count,mean,stddev,min,max\n{},{},{},{},{}", s.count, s.mean, s.stddev, s.min, s.max)
}

fn lcs_cmd(a: &LcsArgs) -> Outcome {
    let words = Word::parse_many(&[&a.v, &a.w], a.alphabet)?;
    let (v, w) = (&words[0], &words[1]);
    let mut out = json!({ "v_len": v.len(), "w_len": w.len() });
    let length = match a.band {
        Band::Exact => {
            out["method"] = json!("exact");
            lcs_bitparallel(v, w)
        }
        Band::Fixed(t) => {
            out["method"] = json!("banded");
            out["band"] = json!(t);
            lcs_banded(v, w, t as i64)?
        }
        Band::Auto => {
            let h = lcs_heuristic(v, w, &BandSchedule::for_length(v.len().max(w.len())));
            out["method"] = json!("heuristic");
            out["band_used"] = json!(h.band_used);
            out["confirmed"] = json!(h.confirmed);
            h.length
        }
    };
    out["lcs"] = json!(length);
    Ok(render(a.out.format, out, || length.to_string()))
}

fn periodic_cmd(a: &PeriodicArgs) -> Outcome {
    let words = Word::parse_many(&[&a.word.word, &a.r], a.word.alphabet)?;
    let (w, r) = (&words[0], &words[1]);
    let x = a.n.unwrap_or(r.len());
    let length = lcs_periodic(r, w, x)?;
    Ok(render(a.out.format, json!({ "word": a.word.word, "x": x, "lcs": length }), || length.to_string()))
}

/// Speeds by the requested method, plus sigmas when they are available.
fn speeds_for(w: &Word, method: Method, sampling: &SamplingArgs) -> Result<(Vec<Scalar>, Option<Vec<SummaryStats>>), Failure> {
    let opts = SolveOptions::default();
    match method {
        Method::Exact => {
            let sol = ChainSolution::solve(w, w.alphabet(), &opts)?;
            Ok((sol.speeds().expect("solved").to_vec(), None))
        }
        Method::Reduced => {
            let partial = speeds_reduced(w, w.alphabet(), w.len(), &opts)?;
            Ok((chain::difference(&partial), None))
        }
        Method::Montecarlo => {
            let cfg = sampling.config(100_000, 10, w.alphabet().size());
            let stats = estimate_speeds(w, &cfg)?;
            Ok((stats.iter().map(|s| Scalar::Approx(s.mean)).collect(), Some(stats)))
        }
    }
}

fn speeds_cmd(a: &SpeedsArgs) -> Outcome {
    let w = a.word.parse()?;
    let (speeds, stats) = speeds_for(&w, a.method, &a.sampling)?;
    let text = scalars(&speeds);
    let mut out = json!({ "word": a.word.word, "alphabet": w.alphabet().size(), "speeds": text });
    if let Some(stats) = stats {
        out["samples"] = json!(stats);
    }
    Ok(render(a.out.format, out, || text.join(",")))
}

fn curve_csv(c: &chain::GammaCurve) -> String {
    let mut s = String::from("rho,gamma,tau");
    for b in &c.breakpoints {
        s.push_str(&format!("\n{},{},{}", b.rho, b.gamma, b.tau));
    }
    s
}

fn gamma_cmd(a: &GammaArgs) -> Outcome {
    let w = a.word.parse()?;
    let opts = SolveOptions::default();
    if a.method == Method::Montecarlo {
        let rho = a.rho.clone().unwrap_or_else(|| BigRational::from_integer(1.into()));
        let cfg = a.sampling.config(100_000, 10, w.alphabet().size());
        let (g, stats) = estimate_gamma(&w, &rho, &cfg)?;
        let out = json!({
            "word": a.word.word, "rho": rho.to_string(), "method": "montecarlo", "gamma": g,
            "n": cfg.n, "trials": cfg.trials, "seed": cfg.seed, "speeds": stats,
        });
        return Ok(render(a.out.format, out, || format!("rho,gamma\n{rho},{g}")));
    }
    if a.method == Method::Reduced {
        let (speeds, _) = speeds_for(&w, Method::Reduced, &a.sampling)?;
        return Ok(match &a.rho {
            Some(rho) => {
                let g = chain::gamma(&speeds, w.len(), rho)?;
                let out = json!({ "word": a.word.word, "rho": rho.to_string(), "gamma": g.to_string(), "tau": null });
                render(a.out.format, out, || format!("rho,gamma\n{rho},{g}"))
            }
            None => {
                let c = gamma_curve(&speeds, w.len(), None)?;
                render(a.out.format, serde_json::to_value(&c).expect("curve serializes"), || curve_csv(&c))
            }
        });
    }
    let sol = ChainSolution::solve(&w, w.alphabet(), &opts)?;
    Ok(match &a.rho {
        Some(rho) => {
            let g = sol.gamma(rho)?;
            let t = sol.tau(rho, &opts)?;
            let out = json!({ "word": a.word.word, "rho": rho.to_string(), "gamma": g.to_string(), "tau": t });
            render(a.out.format, out, || format!("rho,gamma,tau\n{rho},{g},{t}"))
        }
        None => {
            let c = sol.curve(&opts)?;
            render(a.out.format, serde_json::to_value(&c).expect("curve serializes"), || curve_csv(&c))
        }
    })
}

fn tau_cmd(a: &TauArgs) -> Outcome {
    let w = a.word.parse()?;
    let opts = SolveOptions::default();
    let sol = ChainSolution::solve(&w, w.alphabet(), &opts)?;
    let rows: Vec<(String, f64)> = match &a.rho {
        Some(rho) => vec![(rho.to_string(), sol.tau(rho, &opts)?)],
        None => {
            let mut rows = Vec::new();
            for s in sol.speeds().expect("solved") {
                let rho = s.exact().expect("exact speeds");
                rows.push((rho.to_string(), sol.tau(rho, &opts)?));
            }
            rows
        }
    };
    let value = match &a.rho {
        Some(_) => json!({ "word": a.word.word, "rho": rows[0].0, "tau": rows[0].1 }),
        None => json!(rows.iter().map(|(r, t)| json!({ "rho": r, "tau": t })).collect::<Vec<_>>()),
    };
    Ok(render(a.out.format, value, || {
        let body: Vec<String> = rows.iter().map(|(r, t)| format!("{r},{t}")).collect();
        format!("rho,tau\n{}", body.join("\n"))
    }))
}

fn margins_cmd(a: &MarginsArgs) -> Outcome {
    let (k, m) = (a.k, a.m);
    if let Some(steps) = a.steps {
        let run = coupled_run(k, m, steps, a.seed)?;
        let tv = run.max_conditional_tv()?;
        let counts: Vec<Value> = run
            .counts
            .iter()
            .map(|(&(pad, set), &c)| {
                let set: Vec<usize> = (0..k).filter(|p| set >> p & 1 == 1).collect();
                json!({ "pad": pad, "set": set, "count": c, "frequency": c as f64 / steps as f64 })
            })
            .collect();
        let out = json!({
            "k": k, "m": m, "steps": steps, "seed": a.seed, "lazy_steps": run.lazy_steps,
            "max_conditional_tv": tv, "counts": counts,
        });
        return Ok(render(a.out.format, out, || run.to_csv().trim_end().to_string()));
    }
    let windows: Vec<Vec<i64>> = match &a.positions {
        Some(p) => vec![p.clone()],
        None => {
            if k == 0 || k > signed::MAX_K || m >= k {
                return Err(Failure::Compute(format!("need 0 <= m < k <= {}", signed::MAX_K)));
            }
            (0u64..1 << (k - 1))
                .filter(|mask| mask.count_ones() as usize == m)
                .map(|mask| {
                    let mut l: Vec<i64> = (1..k as i64).filter(|i| mask >> (i - 1) & 1 == 1).rev().collect();
                    l.push(0);
                    l
                })
                .collect()
        }
    };
    let mut rows = Vec::new();
    for l in &windows {
        let f = margins_formula(k, m, l)?;
        let b = if k <= 20 { Some(margins_bruteforce(k, m, l)?.to_string()) } else { None };
        rows.push((l.clone(), f.to_string(), b));
    }
    let value = json!(rows
        .iter()
        .map(|(l, f, b)| json!({ "k": k, "m": m, "positions": l, "formula": f, "bruteforce": b }))
        .collect::<Vec<_>>());
    let value = if a.positions.is_some() { value[0].clone() } else { value };
    Ok(render(a.out.format, value, || {
        let body: Vec<String> = rows
            .iter()
            .map(|(l, f, _)| {
                let l: Vec<String> = l.iter().map(i64::to_string).collect();
                format!("{},{f}", l.join(" "))
            })
            .collect();
        format!("position(s),probability\n{}", body.join("\n"))
    }))
}

fn delta_cmd(a: &DeltaArgs) -> Outcome {
    let cfg = a.sampling.config(1000, 100, a.alphabet);
    let method = match a.band {
        Band::Auto if default_use_heuristic(cfg.n) => LcsMethod::Heuristic,
        Band::Auto | Band::Exact => LcsMethod::Exact,
        Band::Fixed(t) => LcsMethod::Band(t),
    };
    let samples = delta_samples(&cfg, method)?;
    let xs: Vec<f64> = samples.iter().map(|&d| d as f64).collect();
    let mut out = serde_json::to_value(Report { config: cfg, stats: SummaryStats::from_samples(&xs) }).expect("report serializes");
    out["method"] = serde_json::to_value(method).expect("method serializes");
    Ok(render(a.out.format, out, || {
        let body: Vec<String> = samples.iter().enumerate().map(|(i, d)| format!("{i},{d}")).collect();
        format!("trial,delta\n{}", body.join("\n"))
    }))
}

fn cs_cmd(a: &CsArgs) -> Outcome {
    let cfg = a.sampling.config(10_000, 10, a.alphabet);
    let stats = estimate_gamma_cs(&cfg)?;
    let out = serde_json::to_value(Report { config: cfg, stats }).expect("report serializes");
    Ok(render(a.out.format, out, || stats_csv(&stats)))
}

fn signed_cmd(a: &SignedArgs) -> Outcome {
    let k = a.k;
    if k == 0 || k > 6 {
        return Err(Failure::Compute("signed-check enumerates configurations; use 1 <= k <= 6".into()));
    }
    let sizes: Vec<(usize, usize)> = match (a.a, a.b) {
        (Some(x), Some(y)) => vec![(x, y)],
        (Some(x), None) => (0..=3).map(|y| (x, y)).collect(),
        (None, Some(y)) => (0..=3).map(|x| (x, y)).collect(),
        (None, None) => (0..=3).flat_map(|x| (0..=3).map(move |y| (x, y))).collect(),
    };
    let mut reports = Vec::new();
    let mut bad = 0;
    for (x, y) in sizes {
        if x + y == 0 || x > k || y > k {
            continue;
        }
        let configs = signed::enumerate_non_end(k, x, y);
        let mut rtrt = 0;
        for c in &configs {
            let back = signed::t_step(c)
                .map(|t| signed::r_map(&t))
                .and_then(|r| signed::t_step(&r))
                .map(|t| signed::r_map(&t));
            if back.as_ref().ok() != Some(c) {
                rtrt += 1;
            }
        }
        let involution = configs.iter().filter(|c| signed::r_map(&signed::r_map(c)) != **c).count();
        let degree = signed::degrees(k, x, y)?.iter().filter(|(_, i, o)| *i != x + y || *o != x + y).count();
        bad += rtrt + involution + degree;
        reports.push(json!({
            "a": x, "b": y, "configs": configs.len(),
            "rtrt_violations": rtrt, "involution_violations": involution, "degree_violations": degree,
        }));
    }
    let csv_rows: Vec<String> = reports
        .iter()
        .map(|r| format!("{},{},{},{},{},{}", r["a"], r["b"], r["configs"], r["rtrt_violations"], r["involution_violations"], r["degree_violations"]))
        .collect();
    let out = render(a.out.format, json!({ "k": k, "checks": reports, "violations": bad }), || {
        format!("a,b,configs,rtrt_violations,involution_violations,degree_violations\n{}", csv_rows.join("\n"))
    });
    if bad > 0 {
        let _ = writeln!(std::io::stdout(), "{out}");
        return Err(Failure::Compute(format!("{bad} violations")));
    }
    Ok(out)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Lcs(a) => lcs_cmd(a),
        Command::PeriodicLcs(a) => periodic_cmd(a),
        Command::Gamma(a) => gamma_cmd(a),
        Command::Speeds(a) => speeds_cmd(a),
        Command::Tau(a) => tau_cmd(a),
        Command::Margins(a) => margins_cmd(a),
        Command::Delta(a) => delta_cmd(a),
        Command::CsEstimate(a) => cs_cmd(a),
        Command::SignedCheck(a) => signed_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout(), "{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
