//! Command-line front end. [`run`] does all the work so it can be tested
//! without spawning processes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use clap::{Parser, Subcommand};

use vwreath::autgen::{a5_check, build, factor, parse_factors, FactorOptions};
use vwreath::base::{Ctx, KElement, TwistContext};
use vwreath::classify::{classify_endos, classify_wreath, sufficient_iso_check};
use vwreath::gamma::{FiniteGroup, Group, GroupHom, OmegaData};
use vwreath::random::rng;
use vwreath::rigidity::decompose;
use vwreath::semidirect::{center, GElement, Model};
use vwreath::thompson::{cell_swap, x0, VElement};
use vwreath::verify::{self, VerifyOptions, SUITES};
use vwreath::words::{Cylinder, DyadicPoint, SupportSet};
use vwreath::Error;

pub const EXIT_OK: i32 = 0;
/// Negative mathematical verdict or failed check.
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "vwreath", about = "Thompson's group V and twisted wreath products over it")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Case count for randomized checks.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Depth for partitions and probe sets.
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Group spec (`cyclic:4`, `sym:3`, `product:A,B`, `table:...`) or a file holding one.
    #[arg(long, global = true, default_value = "cyclic:2")]
    group: String,
    /// Automorphism β of the group: `id`, `inv`, `mul:k`, `ad:<elt>` or `[values]`.
    #[arg(long, global = true, default_value = "id")]
    twist: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Product v∘w of two elements of V.
    VMul { v: String, w: String },
    VInv { v: String },
    /// Reduced form of a possibly unreduced table.
    VReduce { v: String },
    /// Image of a point (`0110`) or cylinder (`C:01`).
    VAct { v: String, target: String },
    /// Slope exponent at a point.
    VSlope { v: String, x: String },
    KMul { a: String, b: String },
    /// π(v)(a).
    KAct { v: String, a: String },
    KSupp { a: String },
    KRestrict { a: String, cylinder: String },
    GMul { g: String, h: String },
    GInv { g: String },
    /// g h g⁻¹.
    GConj { g: String, h: String },
    /// g h g⁻¹ h⁻¹.
    GComm { g: String, h: String },
    /// The center ZΓ ∩ Γ^β of the wreath product.
    GCenter,
    #[command(subcommand)]
    Classify(ClassifyCmd),
    #[command(subcommand)]
    Aut(AutCmd),
    #[command(subcommand)]
    Rigidity(RigidityCmd),
    /// Runs one property suite, or all of them.
    Verify { suite: String },
}

#[derive(Subcommand, Debug)]
enum ClassifyCmd {
    /// Two twisted wreath products, each given as GROUP AUTOMORPHISM.
    Wreath { group: String, beta: String, group_t: String, beta_t: String },
    /// Two endomorphism models, each given as GROUP ENDOMORPHISM.
    Endo { group: String, beta: String, group_t: String, beta_t: String },
    /// Two maps ω(g, h) = ω₀(g)ω₁(h), each given as GROUP ω₀ ω₁.
    Omega { group: String, w0: String, w1: String, group_t: String, w0_t: String, w1_t: String },
}

#[derive(Subcommand, Debug)]
enum AutCmd {
    /// Composite of factors such as `A1({0->1,1->0}) * A3(2)`.
    Build {
        factors: String,
        /// Element to map.
        #[arg(long)]
        apply: Option<String>,
    },
    Factor { factors: String },
    A5Check { factors: String },
}

#[derive(Subcommand, Debug)]
enum RigidityCmd {
    Decompose { factors: String },
}

/// Parsed inputs shared by the subcommands.
pub struct Session {
    /// Groups by the spec text that produced them.
    groups: BTreeMap<String, Group>,
    ctx: Option<Ctx>,
    pub seed: u64,
}

impl Session {
    pub fn new(seed: u64) -> Self {
        Session { groups: BTreeMap::new(), ctx: None, seed }
    }

    /// Loads a group from a spec or from a file containing one.
    pub fn group(&mut self, spec: &str) -> vwreath::Result<Group> {
        let text = if Path::new(spec).is_file() {
            std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))?
        } else {
            spec.to_string()
        };
        let key = text.trim().to_string();
        if let Some(g) = self.groups.get(&key) {
            return Ok(g.clone());
        }
        let g = FiniteGroup::parse_spec(&key)?;
        self.groups.insert(key, g.clone());
        Ok(g)
    }

    pub fn load_context(&mut self, group: &str, twist: &str) -> vwreath::Result<Ctx> {
        let g = self.group(group)?;
        let ctx = TwistContext::new(&g, GroupHom::parse(twist, &g, &g)?)?;
        self.ctx = Some(ctx.clone());
        Ok(ctx)
    }

    pub fn ctx(&self) -> vwreath::Result<&Ctx> {
        self.ctx.as_ref().ok_or_else(|| Error::Precondition("no context loaded".into()))
    }
}

/// Parses `text` as a value of `kind` (`word`, `point`, `cylinder`,
/// `support`, `v`, `k`, `g`) and prints its canonical form.
pub fn parse_element(session: &Session, kind: &str, text: &str) -> vwreath::Result<String> {
    Ok(match kind {
        "word" => text.parse::<vwreath::words::BinaryWord>()?.to_string(),
        "point" => parse_point(text)?.to_string(),
        "cylinder" => text.parse::<Cylinder>()?.to_string(),
        "support" => text.parse::<SupportSet>()?.to_string(),
        "v" => parse_v(text)?.to_string(),
        "k" => KElement::parse(session.ctx()?, text)?.to_string(),
        "g" => GElement::parse(session.ctx()?, text)?.to_string(),
        _ => return Err(Error::Parse(format!("unknown element kind {kind:?}"))),
    })
}

fn parse_point(s: &str) -> vwreath::Result<DyadicPoint> {
    let s = s.trim();
    s.strip_prefix("P:").unwrap_or(s).parse()
}

fn parse_v(s: &str) -> vwreath::Result<VElement> {
    match s.trim() {
        "x0" => Ok(x0()),
        "swap" => Ok(cell_swap()),
        t => t.parse(),
    }
}

enum Failure {
    Input(String),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CheckFailed(_) | Error::Extraction(_) => Failure::Verdict(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(i32, String), Failure>;

/// Runs the command line `argv` (program name first) and returns the exit
/// code and everything that would be printed.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return (code, e.to_string());
        }
    };
    match dispatch(&cli) {
        Ok(out) => out,
        Err(Failure::Input(msg)) => (EXIT_INPUT, format!("error: {msg}\n")),
        Err(Failure::Verdict(msg)) => (EXIT_VERDICT, format!("check failed: {msg}\n")),
    }
}

fn ok(s: impl Into<String>) -> Outcome {
    let mut s = s.into();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    Ok((EXIT_OK, s))
}

fn dispatch(cli: &Cli) -> Outcome {
    let mut session = Session::new(cli.seed);
    let needs_ctx = matches!(
        cli.cmd,
        Cmd::KMul { .. }
            | Cmd::KAct { .. }
            | Cmd::KSupp { .. }
            | Cmd::KRestrict { .. }
            | Cmd::GMul { .. }
            | Cmd::GInv { .. }
            | Cmd::GConj { .. }
            | Cmd::GComm { .. }
            | Cmd::GCenter
            | Cmd::Aut(_)
            | Cmd::Rigidity(_)
    );
    if needs_ctx {
        session.load_context(&cli.group, &cli.twist)?;
    }
    match &cli.cmd {
        Cmd::VMul { v, w } => ok(parse_v(v)?.mul(&parse_v(w)?).to_string()),
        Cmd::VInv { v } => ok(parse_v(v)?.inv().to_string()),
        Cmd::VReduce { v } => ok(parse_v(v)?.to_string()),
        Cmd::VAct { v, target } => {
            let v = parse_v(v)?;
            if target.trim_start().starts_with("C:") {
                ok(v.act_cylinder(&target.parse()?).to_string())
            } else {
                ok(v.act_point(&parse_point(target)?).to_string())
            }
        }
        Cmd::VSlope { v, x } => ok(parse_v(v)?.slope(&parse_point(x)?).to_string()),
        Cmd::KMul { a, b } => {
            let ctx = session.ctx()?;
            ok(KElement::parse(ctx, a)?.mul(&KElement::parse(ctx, b)?)?.to_string())
        }
        Cmd::KAct { v, a } => ok(KElement::parse(session.ctx()?, a)?.act(&parse_v(v)?).to_string()),
        Cmd::KSupp { a } => ok(KElement::parse(session.ctx()?, a)?.support().to_string()),
        Cmd::KRestrict { a, cylinder } => {
            ok(KElement::parse(session.ctx()?, a)?.restrict(&cylinder.parse()?).to_string())
        }
        Cmd::GMul { g, h } => g_binary(&session, g, h, |m, x, y| m.mul(x, y)),
        Cmd::GInv { g } => {
            let ctx = session.ctx()?;
            ok(Model::Wreath(ctx.clone()).inv(&GElement::parse(ctx, g)?)?.to_string())
        }
        Cmd::GConj { g, h } => g_binary(&session, g, h, |m, x, y| m.conj(x, y)),
        Cmd::GComm { g, h } => g_binary(&session, g, h, |m, x, y| m.commutator(x, y)),
        Cmd::GCenter => {
            let ctx = session.ctx()?;
            let names: Vec<&str> = center(ctx).into_iter().map(|z| ctx.group().name(z)).collect();
            ok(format!("{{{}}}", names.join(", ")))
        }
        Cmd::Classify(c) => classify(&mut session, c),
        Cmd::Aut(a) => aut(cli, &session, a),
        Cmd::Rigidity(RigidityCmd::Decompose { factors }) => {
            let ctx = session.ctx()?;
            let theta = build(ctx, &parse_factors(ctx, factors)?)?;
            let probes = DyadicPoint::all_up_to(cli.depth.unwrap_or(2));
            let g = ctx.group();
            let ks: Vec<KElement> = g
                .elements()
                .filter(|&x| x != g.identity())
                .map(|x| KElement::point_mass(ctx, parse_point("1").expect("valid point"), x))
                .collect();
            let w = decompose(&theta, &probes, &[x0(), cell_swap()], &ks, cli.depth.unwrap_or(5))?;
            ok(w.to_string())
        }
        Cmd::Verify { suite } => {
            let opts = VerifyOptions { seed: cli.seed, samples: cli.samples, jobs: cli.jobs };
            let reports = if suite == "all" {
                verify::run_all(&opts)
            } else {
                vec![verify::run(suite, &opts).map_err(|_| {
                    Failure::Input(format!("unknown suite {suite:?}; expected all or one of {}", SUITES.join(", ")))
                })?]
            };
            let mut out = String::new();
            for r in &reports {
                writeln!(out, "{r}").expect("writing to a string");
            }
            let passed = reports.iter().filter(|r| r.passed()).count();
            writeln!(out, "{passed}/{} suites passed", reports.len()).expect("writing to a string");
            Ok((if passed == reports.len() { EXIT_OK } else { EXIT_VERDICT }, out))
        }
    }
}

fn g_binary(
    session: &Session,
    g: &str,
    h: &str,
    f: impl Fn(&Model, &GElement, &GElement) -> vwreath::Result<GElement>,
) -> Outcome {
    let ctx = session.ctx()?;
    let model = Model::Wreath(ctx.clone());
    ok(f(&model, &GElement::parse(ctx, g)?, &GElement::parse(ctx, h)?)?.to_string())
}

fn classify(session: &mut Session, c: &ClassifyCmd) -> Outcome {
    let mut hom = |group: &str, spec: &str| -> vwreath::Result<GroupHom> {
        let g = session.group(group)?;
        GroupHom::parse(spec, &g, &g)
    };
    match c {
        ClassifyCmd::Wreath { group, beta, group_t, beta_t } => {
            let (b, bt) = (hom(group, beta)?, hom(group_t, beta_t)?);
            for x in [&b, &bt] {
                if !x.is_bijective() {
                    return Err(Failure::Input(format!("{} is not an automorphism", x.display_values())));
                }
            }
            Ok(match classify_wreath(&b, &bt) {
                Some((gamma, h)) => (EXIT_OK, format!("ISO\ngamma = {}\nh = {}\n", gamma.display_values(), bt.source().name(h))),
                None => (EXIT_VERDICT, "NOT-ISO\n".into()),
            })
        }
        ClassifyCmd::Endo { group, beta, group_t, beta_t } => {
            let (b, bt) = (hom(group, beta)?, hom(group_t, beta_t)?);
            Ok(match classify_endos(&b, &bt)? {
                Some(w) => {
                    let names = |g: &Group, xs: &[usize]| xs.iter().map(|&x| g.name(x).to_string()).collect::<Vec<_>>().join(" ");
                    (
                        EXIT_OK,
                        format!(
                            "ISO\nimage = [{}]\nimage_t = [{}]\ngamma = {}\nh = {}\n",
                            names(b.source(), &w.image),
                            names(bt.source(), &w.image_t),
                            w.gamma.display_values(),
                            w.gamma.target().name(w.h)
                        ),
                    )
                }
                None => (EXIT_VERDICT, "NOT-ISO\n".into()),
            })
        }
        ClassifyCmd::Omega { group, w0, w1, group_t, w0_t, w1_t } => {
            let w = OmegaData::from_pair(&hom(group, w0)?, &hom(group, w1)?)?;
            let wt = OmegaData::from_pair(&hom(group_t, w0_t)?, &hom(group_t, w1_t)?)?;
            Ok(match sufficient_iso_check(&w, &wt) {
                Some(x) => (
                    EXIT_OK,
                    format!(
                        "ISO-SUFFICIENT-WITNESS\ngamma = {}\nswap = {}\ng = {}\n",
                        x.gamma.display_values(),
                        x.swap,
                        w.group().name(x.g)
                    ),
                ),
                None => (EXIT_VERDICT, "NO-WITNESS\n".into()),
            })
        }
    }
}

fn aut(cli: &Cli, session: &Session, a: &AutCmd) -> Outcome {
    let ctx = session.ctx()?;
    let samples = cli.samples.unwrap_or(20);
    match a {
        AutCmd::Build { factors, apply } => {
            let fs = parse_factors(ctx, factors)?;
            let theta = build(ctx, &fs)?;
            theta.validate(&mut rng(cli.seed), samples)?;
            let mut out = String::new();
            let names: Vec<String> = fs.iter().map(ToString::to_string).collect();
            writeln!(out, "theta = {}", if names.is_empty() { "id".into() } else { names.join(" * ") }).expect("string");
            writeln!(out, "validated on {samples} samples").expect("string");
            if let Some(g) = apply {
                writeln!(out, "{}", theta.apply(&GElement::parse(ctx, g)?)?).expect("string");
            }
            ok(out)
        }
        AutCmd::Factor { factors } => {
            let theta = build(ctx, &parse_factors(ctx, factors)?)?;
            let mut opts = FactorOptions { samples, seed: cli.seed, ..FactorOptions::default() };
            if let Some(d) = cli.depth {
                opts.depth = d;
                opts.phi_depth = d;
            }
            let f = factor(&theta, &opts)?;
            let names: Vec<String> = f.factors.iter().map(ToString::to_string).collect();
            let out = format!(
                "factors = {}\nresidual identity: {}\nresidual in A5: {}\n",
                if names.is_empty() { "id".into() } else { names.join(" * ") },
                f.residual_is_identity,
                f.residual_in_a5
            );
            Ok((if f.residual_is_identity { EXIT_OK } else { EXIT_VERDICT }, out))
        }
        AutCmd::A5Check { factors } => {
            let theta = build(ctx, &parse_factors(ctx, factors)?)?;
            Ok(if a5_check(&theta, samples, cli.seed)? {
                (EXIT_OK, "IN-A5\n".into())
            } else {
                (EXIT_VERDICT, "NOT-IN-A5\n".into())
            })
        }
    }
}
