//! Command-line front end.
//!
//! Exit status is 0 on success, 2 on a usage or configuration error and 1
//! on any other failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::campaign::Runner;
use crate::channel::{channel_llrs, ChannelConfig};
use crate::code_spec::{crc_attach, encode, BitVector, CodeSpec};
use crate::config::{RateConvention, RunConfig};
use crate::cost::{estimate_cost, CostModel};
use crate::error::{Error, Result};
use crate::flip::{build_eis_plan, build_fis_plan, EisScaling, Engine};
use crate::io::{self, FerWriter, Header};
use crate::sc_kernel::{LlrFrame, ScDecoder};

#[derive(Parser, Debug)]
#[command(name = "polarflip", version, about = "Polar code SC / SC-Flip decoding and Monte Carlo campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the frozen mask of a code.
    Construct(CodeArgs),
    /// FER sweep over one or more Eb/N0 points.
    Simulate(SimulateArgs),
    /// E1 occurrence profile from genie-aided decoding.
    #[command(name = "profile-e1")]
    ProfileE1(ProfileArgs),
    /// Mean leaf |LLR| per unfrozen rank under plain SC.
    #[command(name = "profile-llr")]
    ProfileLlr(ProfileArgs),
    /// Turn an E1 profile into a FIS or EIS flip plan.
    #[command(name = "build-plan")]
    BuildPlan(BuildPlanArgs),
    /// Logic-cost breakdown of SC-Flip with and without the sorter.
    Cost(CostArgs),
    /// Decode a single frame.
    Decode(DecodeArgs),
}

#[derive(Args, Debug, Clone)]
struct CodeArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Codeword length N.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// CRC generator polynomial, e.g. 0x107.
    #[arg(long)]
    crc_poly: Option<String>,
    #[arg(long)]
    design_snr: Option<f64>,
    /// Frozen-mask CSV to use instead of constructing one.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ChannelArgs {
    #[arg(long)]
    ebn0: Option<f64>,
    /// start:stop:step in dB.
    #[arg(long)]
    ebn0_range: Option<String>,
    #[arg(long, value_enum)]
    rate_convention: Option<RateArg>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RateArg {
    Info,
    InfoPlusCrc,
}

#[derive(Args, Debug, Clone)]
struct DecoderArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(Engine::NAMES))]
    decoder: Option<String>,
    #[arg(long)]
    tmax: Option<usize>,
    /// Flip plan CSV (required by fis and eis).
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    eis_scaling: Option<String>,
    /// Genie corrections allowed in FER runs; 0 means unlimited.
    #[arg(long)]
    oracle_budget: Option<usize>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[arg(long)]
    frames: Option<u64>,
    /// Stop a point after this many frame errors; 0 runs all frames.
    #[arg(long)]
    max_errors: Option<u64>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    frames: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PlanKind {
    Fis,
    Eis,
}

#[derive(Args, Debug)]
struct BuildPlanArgs {
    /// Profile CSV written by profile-e1.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, value_enum)]
    mode: PlanKind,
    /// Plan length for FIS.
    #[arg(long, default_value_t = 10)]
    tmax: usize,
    /// Candidate-set size for EIS.
    #[arg(long)]
    set_size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CostArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    pe: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    tmax: Option<u32>,
    #[arg(long)]
    w_xor: Option<f64>,
    #[arg(long)]
    w_mux: Option<f64>,
    #[arg(long)]
    w_sum: Option<f64>,
    #[arg(long)]
    w_comparator: Option<f64>,
    #[arg(long)]
    w_register: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Channel LLRs, comma or whitespace separated.
    #[arg(long, conflicts_with = "codeword_hex")]
    llr_file: Option<PathBuf>,
    /// Noiseless hard codeword in hex; decoded from saturated LLRs.
    #[arg(long)]
    codeword_hex: Option<String>,
    /// Transmitted K-bit message in hex, needed by the oracle.
    #[arg(long)]
    message_hex: Option<String>,
}

/// Runs the tool with process stdout/stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the tool writing CSV to `out` (unless `--out` is given) and
/// diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Parameter(_) | Error::Parse(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Construct(a) => construct(a, out),
        Command::Simulate(a) => simulate(a, out, err),
        Command::ProfileE1(a) => profile_e1(a, out),
        Command::ProfileLlr(a) => profile_llr(a, out),
        Command::BuildPlan(a) => build_plan(a, out),
        Command::Cost(a) => cost(a, out),
        Command::Decode(a) => decode(a, out),
    }
}

fn with_output(path: &Option<PathBuf>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    path.as_deref().map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn apply_code(cfg: &mut RunConfig, a: &CodeArgs) {
    if let Some(v) = a.length {
        cfg.code.length = v;
    }
    if let Some(v) = a.k {
        cfg.code.k = v;
    }
    if let Some(v) = &a.crc_poly {
        cfg.code.crc_poly = v.clone();
    }
    if let Some(v) = a.design_snr {
        cfg.code.design_snr_db = v;
    }
    if let Some(v) = &a.mask {
        cfg.code.mask = Some(v.clone());
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
}

fn apply_channel(cfg: &mut RunConfig, a: &ChannelArgs) {
    if let Some(v) = a.ebn0 {
        cfg.channel.ebn0_db = v;
        cfg.channel.ebn0_range = None;
    }
    if let Some(v) = &a.ebn0_range {
        cfg.channel.ebn0_range = Some(v.clone());
    }
    if let Some(v) = a.rate_convention {
        cfg.channel.rate = match v {
            RateArg::Info => RateConvention::Info,
            RateArg::InfoPlusCrc => RateConvention::InfoPlusCrc,
        };
    }
}

fn apply_decoder(cfg: &mut RunConfig, a: &DecoderArgs) -> Result<()> {
    if let Some(v) = &a.decoder {
        cfg.decoder.name = v.clone();
    }
    if let Some(v) = a.tmax {
        cfg.decoder.t_max = v;
    }
    if let Some(v) = &a.plan {
        cfg.decoder.plan = Some(v.clone());
    }
    if let Some(v) = &a.eis_scaling {
        cfg.decoder.eis_scaling = v.parse::<EisScaling>()?;
    }
    if let Some(v) = a.oracle_budget {
        cfg.decoder.oracle_budget = v;
    }
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))
}

fn engine_from(cfg: &RunConfig, spec: &CodeSpec) -> Result<Engine> {
    let d = &cfg.decoder;
    let plan = || -> Result<_> {
        let path = d.plan.as_ref().ok_or_else(|| Error::Parameter(format!("decoder {} needs --plan", d.name)))?;
        io::read_plan(open(path)?)
    };
    let engine = match d.name.as_str() {
        "sc" => Engine::Sc,
        "scflip" => Engine::ScFlip { t_max: d.t_max },
        "fis" => Engine::Fis { plan: plan()?, t_max: d.t_max },
        "eis" => Engine::Eis { plan: plan()?, t_max: d.t_max, scaling: d.eis_scaling },
        "oracle" => Engine::Oracle { budget: (d.oracle_budget > 0).then_some(d.oracle_budget) },
        other => return Err(Error::Parameter(format!("unknown decoder {other:?}; expected one of {:?}", Engine::NAMES))),
    };
    engine.validate(spec)?;
    Ok(engine)
}

fn header(cfg: &RunConfig, spec: &CodeSpec) -> Header {
    Header::new()
        .with("tool", format!("polarflip {}", env!("CARGO_PKG_VERSION")))
        .with("seed", cfg.seed)
        .with("config_hash", cfg.hash())
        .with("code", spec.fingerprint())
}

fn construct(a: CodeArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(&a.config)?;
    apply_code(&mut cfg, &a);
    let spec = cfg.code.build()?;
    let h = header(&cfg, &spec).with("design_snr_db", spec.design_snr_db());
    with_output(&a.out, out, |w| io::write_mask(w, &h, spec.frozen_mask()))
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(&a.code.config)?;
    apply_code(&mut cfg, &a.code);
    apply_channel(&mut cfg, &a.channel);
    apply_decoder(&mut cfg, &a.decoder)?;
    if let Some(f) = a.frames {
        cfg.frames = f;
    }
    if let Some(m) = a.max_errors {
        cfg.max_errors = m;
    }
    if cfg.frames == 0 {
        return Err(Error::Parameter("--frames must be positive".into()));
    }
    let spec = cfg.code.build()?;
    let engine = engine_from(&cfg, &spec)?;
    let points = cfg.channel.points()?;
    let rate = cfg.channel.rate.rate(&spec);
    let runner = Runner::from_env();
    let stop = (cfg.max_errors > 0).then_some(cfg.max_errors);
    let h = header(&cfg, &spec).with("t_max", cfg.decoder.t_max).with("workers", runner.workers());
    with_output(&a.code.out, out, |w| {
        let mut fer = FerWriter::new(w, &h)?;
        for ebn0 in points {
            let ch = ChannelConfig::new(ebn0, rate, cfg.seed)?;
            let p = runner.run_fer(&spec, &engine, &ch, cfg.frames, stop)?;
            let _ = writeln!(err, "{} {:.2} dB: {}/{} frame errors", p.decoder, ebn0, p.frame_errors, p.frames);
            fer.row(&p)?;
        }
        Ok(())
    })
}

fn profile_setup(a: &ProfileArgs) -> Result<(RunConfig, CodeSpec, ChannelConfig)> {
    let mut cfg = load_config(&a.code.config)?;
    apply_code(&mut cfg, &a.code);
    apply_channel(&mut cfg, &a.channel);
    if let Some(f) = a.frames {
        cfg.frames = f;
    }
    if cfg.frames == 0 {
        return Err(Error::Parameter("--frames must be positive".into()));
    }
    let spec = cfg.code.build()?;
    let points = cfg.channel.points()?;
    let [ebn0] = points.as_slice() else {
        return Err(Error::Parameter("profiles take a single --ebn0 point".into()));
    };
    let ch = ChannelConfig::new(*ebn0, cfg.channel.rate.rate(&spec), cfg.seed)?;
    Ok((cfg, spec, ch))
}

fn profile_e1(a: ProfileArgs, out: &mut dyn Write) -> Result<()> {
    let (cfg, spec, ch) = profile_setup(&a)?;
    let profile = Runner::from_env().profile_e1(&spec, &ch, cfg.frames)?;
    let h = header(&cfg, &spec);
    with_output(&a.code.out, out, |w| io::write_profile(w, &h, &profile))
}

fn profile_llr(a: ProfileArgs, out: &mut dyn Write) -> Result<()> {
    let (cfg, spec, ch) = profile_setup(&a)?;
    let profile = Runner::from_env().profile_llr_magnitude(&spec, &ch, cfg.frames)?;
    let h = header(&cfg, &spec);
    with_output(&a.code.out, out, |w| io::write_llr_profile(w, &h, &profile))
}

fn build_plan(a: BuildPlanArgs, out: &mut dyn Write) -> Result<()> {
    let profile = io::read_profile(open(&a.profile)?)?;
    let plan = match a.mode {
        PlanKind::Fis => build_fis_plan(&profile, a.tmax)?,
        PlanKind::Eis => {
            let size = a.set_size.ok_or_else(|| Error::Parameter("--mode eis needs --set-size".into()))?;
            build_eis_plan(&profile, size)?
        }
    };
    let h = Header::new()
        .with("tool", format!("polarflip {}", env!("CARGO_PKG_VERSION")))
        .with("code", profile.code_id())
        .with("profile_ebn0_db", profile.ebn0_db());
    with_output(&a.out, out, |w| io::write_plan(w, &h, &plan))
}

fn cost(a: CostArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(&a.config)?;
    let mut model = CostModel { pe: cfg.cost.pe, q: cfg.cost.q, t_max: cfg.cost.t_max, weights: cfg.cost.weights };
    model.pe = a.pe.unwrap_or(model.pe);
    model.q = a.q.unwrap_or(model.q);
    model.t_max = a.tmax.unwrap_or(model.t_max);
    let w = &mut model.weights;
    for (slot, v) in [
        (&mut w.xor, a.w_xor),
        (&mut w.mux, a.w_mux),
        (&mut w.sum, a.w_sum),
        (&mut w.comparator, a.w_comparator),
        (&mut w.register, a.w_register),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    let b = estimate_cost(&model)?;
    let h = Header::new()
        .with("tool", format!("polarflip {}", env!("CARGO_PKG_VERSION")))
        .with("pe", model.pe)
        .with("q", model.q)
        .with("t_max", model.t_max);
    with_output(&a.out, out, |w| io::write_cost(w, &h, &b))
}

fn decode(a: DecodeArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(&a.code.config)?;
    apply_code(&mut cfg, &a.code);
    apply_decoder(&mut cfg, &a.decoder)?;
    let spec = cfg.code.build()?;
    let engine = engine_from(&cfg, &spec)?;

    let llrs = match (&a.llr_file, &a.codeword_hex) {
        (Some(p), _) => LlrFrame::new(io::read_llrs(open(p)?)?)?.into_inner(),
        (None, Some(hex)) => {
            let x = BitVector::from_hex(hex, spec.len())?;
            channel_llrs(&x, 0.0, &mut rand::rngs::mock::StepRng::new(0, 0))?.into_inner()
        }
        (None, None) => return Err(Error::Parameter("decode needs --llr-file or --codeword-hex".into())),
    };
    let true_u = match &a.message_hex {
        Some(hex) => {
            let info = BitVector::from_hex(hex, spec.k())?;
            spec.embed(&crc_attach(&info, spec.crc_poly()))?
        }
        None if engine.needs_truth() => return Err(Error::Parameter("the oracle needs --message-hex".into())),
        None => BitVector::zeros(spec.len()),
    };
    let outcome = engine.decode(&mut ScDecoder::for_spec(&spec), &llrs, &spec, &true_u)?;
    let h = header(&cfg, &spec);
    with_output(&a.code.out, out, |w| {
        h.write(&mut *w)?;
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["decoder", "crc_pass", "attempts", "iteration_cost", "flipped_index", "info_hex"])?;
        c.write_record([
            engine.name().to_string(),
            outcome.crc_pass.to_string(),
            outcome.attempts.to_string(),
            outcome.iteration_cost.to_string(),
            outcome.flipped_index.map_or(String::new(), |i| i.to_string()),
            outcome.info_hat.to_hex(),
        ])?;
        c.flush()?;
        Ok(())
    })
}

/// Encodes a K-bit hex message into a hex codeword; handy for building
/// `decode` inputs.
pub fn codeword_hex(spec: &CodeSpec, message_hex: &str) -> Result<String> {
    let info = BitVector::from_hex(message_hex, spec.k())?;
    Ok(encode(&crc_attach(&info, spec.crc_poly()), spec)?.to_hex())
}
