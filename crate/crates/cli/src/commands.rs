use anyhow::{anyhow, bail, Context, Result};
use num::BigRational;
use serde_json::{json, Value};

use nfl_lab::codec::{self, BitString};
use nfl_lab::distributions::{block_witness, ProblemDistribution};
use nfl_lab::domain::{ProblemContext, TargetFunction};
use nfl_lab::machine::{disassemble, Budget, Environment, EstimateKind, MassForm, ProgramIndex, UniversalMass, ISA_VERSION};
use nfl_lab::measures::{expected_performance, parse_measure};
use nfl_lab::optimisers::{find_worst, DecisionTree, OptimiserSpec};
use nfl_lab::par;
use nfl_lab::verify::{
    demo_mptm_free_lunch, demo_prop1, demo_universal_free_lunch, run_suite, Exact, Suite, SuiteConfig,
};

use crate::output::Report;
use crate::{Cli, CodecOp, Command, DemoKind, Global};

fn exact(r: &BigRational) -> Value {
    serde_json::to_value(Exact::from(r)).expect("exact values serialise")
}

fn decimal(r: &BigRational) -> String {
    nfl_lab::distributions::to_f64(r).to_string()
}

impl Global {
    fn context(&self) -> Result<ProblemContext> {
        Ok(ProblemContext::standard(self.x_size, self.y_size)?)
    }

    fn budget(&self) -> Result<Budget> {
        Ok(Budget::new(self.max_len, self.max_steps)?)
    }
}

/// `0,1,1`, `needle:i` (zero-based) or `constant:y`.
fn parse_function(ctx: &ProblemContext, s: &str) -> Result<TargetFunction> {
    if let Some(i) = s.strip_prefix("needle:") {
        let i: usize = i.parse().with_context(|| format!("bad needle position `{i}`"))?;
        if i >= ctx.x_size() {
            bail!("needle position {i} outside |X| = {}", ctx.x_size());
        }
        return Ok(TargetFunction::needle(ctx, i));
    }
    if let Some(y) = s.strip_prefix("constant:") {
        let y: BitString = y.parse()?;
        let y = ctx.y_index_of(&y).ok_or_else(|| anyhow!("`{y}` is not in Y"))?;
        return Ok(TargetFunction::constant(ctx, y));
    }
    let values: Vec<&str> = s.split(',').map(str::trim).collect();
    Ok(TargetFunction::from_strs(ctx, &values)?)
}

fn parse_distribution(ctx: &ProblemContext, s: &str, g: &Global) -> Result<ProblemDistribution> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let seed = |a: Option<&str>| -> Result<u64> {
        a.map_or(Ok(g.seed), |a| a.parse().with_context(|| format!("bad seed `{a}`")))
    };
    Ok(match name {
        "uniform" => ProblemDistribution::uniform_all(ctx, g.cap)?,
        "niah" => ProblemDistribution::niah(ctx, g.cap)?,
        "needle" => {
            let f = parse_function(ctx, s)?;
            ProblemDistribution::point_mass(ctx, &f, g.cap)?
        }
        "point" => {
            let f = parse_function(ctx, arg.ok_or_else(|| anyhow!("`point` needs values"))?)?;
            ProblemDistribution::point_mass(ctx, &f, g.cap)?
        }
        "block-uniform" => ProblemDistribution::block_uniform_random(ctx, seed(arg)?, g.cap)?,
        "simplex" => ProblemDistribution::random_simplex(ctx, seed(arg)?, g.cap)?,
        "universal" => {
            let form: MassForm = arg.unwrap_or("shortest-program").parse()?;
            ProblemDistribution::universal(ctx, g.budget()?, form, g.cap)?
        }
        _ => bail!("unknown distribution `{s}`"),
    })
}

pub fn run(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        par::set_global_threads(t)?;
    }
    match &cli.command {
        Command::Codec { op } => codec_command(op, g),
        Command::Complexity { function, string, form } => complexity(g, function.as_deref(), string.as_deref(), *form),
        Command::Mass { form } => mass(g, *form),
        Command::Dist { dist } => {
            let ctx = g.context()?;
            let p = parse_distribution(&ctx, dist, g)?;
            let doc = p.to_json();
            let rows = doc
                .entries
                .iter()
                .map(|e| {
                    let values: Vec<String> = e.values.iter().map(ToString::to_string).collect();
                    vec![values.join(","), e.weight_num.clone(), e.weight_den.clone()]
                })
                .collect();
            Ok(Report::new(serde_json::to_value(&doc)?, vec!["values", "weight_num", "weight_den"], rows))
        }
        Command::Expect { dist, measure, optimiser } => {
            let ctx = g.context()?;
            let p = parse_distribution(&ctx, dist, g)?;
            let m = parse_measure(measure)?;
            let a = optimiser.parse::<OptimiserSpec>()?.build(&ctx, g.budget()?)?;
            let e = expected_performance(&a, &p, &*m)?;
            let json = json!({
                "optimiser": a.label(),
                "distribution": p.provenance(),
                "measure": m.label(),
                "expectation_num": e.numer().to_string(),
                "expectation_den": e.denom().to_string(),
                "decimal": nfl_lab::distributions::to_f64(&e),
            });
            let row = vec![
                a.label(),
                p.provenance().to_string(),
                m.label(),
                e.numer().to_string(),
                e.denom().to_string(),
                decimal(&e),
            ];
            Ok(Report::new(
                json,
                vec!["optimiser", "distribution", "measure", "expectation_num", "expectation_den", "decimal"],
                vec![row],
            ))
        }
        Command::Verify { suite, trials, class_samples, k, form, tree_cap } => {
            let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let cfg = SuiteConfig {
                max_x: g.max_x,
                x_size: g.x_size,
                y_size: g.y_size,
                budget: g.budget()?,
                form: *form,
                seed: g.seed,
                cap: g.cap,
                tree_cap: *tree_cap,
                trials: *trials,
                class_samples: *class_samples,
                appendix_k: *k,
            };
            let reports = suites.iter().map(|&s| run_suite(s, &cfg)).collect::<nfl_lab::error::Result<Vec<_>>>()?;
            let passed = reports.iter().all(|r| r.passed);
            let rows = reports
                .iter()
                .map(|r| vec![r.suite.clone(), r.passed.to_string(), r.isa_version.to_string(), r.seed.to_string()])
                .collect();
            Ok(Report::new(
                json!({ "passed": passed, "reports": reports }),
                vec!["suite", "passed", "isa_version", "seed"],
                rows,
            )
            .with_verdict(passed))
        }
        Command::Demo { kind } => demo(g, kind),
    }
}

fn codec_command(op: &CodecOp, g: &Global) -> Result<Report> {
    let bits = |s: &str| -> Result<BitString> { Ok(s.parse()?) };
    let (name, input, output): (&str, String, Value) = match op {
        CodecOp::EncodeNat { n } => ("encode-nat", n.to_string(), json!(codec::encode_nat(*n))),
        CodecOp::EncodeString { x } => ("encode-string", x.clone(), json!(codec::encode_string(&bits(x)?))),
        CodecOp::EncodeList { items } => {
            let items = items.iter().map(|s| bits(s)).collect::<Result<Vec<_>>>()?;
            ("encode-list", json!(items).to_string(), json!(codec::encode_list(&items)))
        }
        CodecOp::EncodeFunction { function } => {
            let ctx = g.context()?;
            let f = parse_function(&ctx, function)?;
            ("encode-function", f.display(&ctx), json!(codec::encode_function(&ctx, &f)))
        }
        CodecOp::EncodeContext => {
            let ctx = g.context()?;
            ("encode-context", format!("standard({}, {})", g.x_size, g.y_size), json!(codec::encode_context(&ctx)))
        }
        CodecOp::DecodeNat { bits: b } => ("decode-nat", b.clone(), json!(codec::decode_nat(&bits(b)?)?)),
        CodecOp::DecodeString { bits: b } => ("decode-string", b.clone(), json!(codec::decode_string(&bits(b)?)?)),
        CodecOp::DecodeList { bits: b } => ("decode-list", b.clone(), json!(codec::decode_list(&bits(b)?)?)),
        CodecOp::DecodeFunction { bits: b } => {
            let ctx = g.context()?;
            let f = codec::decode_function(&ctx, &bits(b)?)?;
            ("decode-function", b.clone(), json!(f.to_json(&ctx).values))
        }
        CodecOp::DecodeContext { bits: b } => ("decode-context", b.clone(), json!(codec::decode_context(&bits(b)?)?)),
    };
    let flat = match &output {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    Ok(Report::new(
        json!({ "operation": name, "input": input, "output": output }),
        vec!["operation", "input", "output"],
        vec![vec![name.to_string(), input, flat]],
    ))
}

fn mass_entry(ctx: &ProblemContext, mass: &UniversalMass, i: usize) -> Value {
    let est = &mass.estimates[i];
    let env = Environment::from_condition(&codec::encode_context(ctx));
    let exact_hit = est.kind == EstimateKind::ExactWithinBudget;
    json!({
        "function": ctx.function_at(i).to_json(ctx).values,
        "approx_k": est.value,
        "kind": est.kind,
        "raw_mass": exact(&mass.raw[i]),
        "normalised_mass": exact(&mass.normalised[i]),
        "shortest_program": exact_hit.then(|| est.program.to_string()),
        "listing": exact_hit.then(|| disassemble(&est.program, &env)).flatten(),
    })
}

fn mass_header(mass: &UniversalMass) -> Value {
    json!({
        "isa_version": ISA_VERSION,
        "context": mass.context,
        "budget": mass.budget,
        "form": mass.form,
        "normaliser": exact(&mass.normaliser),
    })
}

fn complexity(g: &Global, function: Option<&str>, string: Option<&str>, form: MassForm) -> Result<Report> {
    let ctx = g.context()?;
    let index = ProgramIndex::for_context(&ctx, g.budget()?)?;
    if let Some(s) = string {
        let target: BitString = s.parse()?;
        let est = index.approx_k(&target);
        let json = json!({
            "isa_version": ISA_VERSION,
            "budget": index.budget(),
            "string": target,
            "approx_k": est.value,
            "kind": est.kind,
            "program": est.program,
        });
        let row = vec![target.to_string(), est.value.to_string(), est.program.to_string()];
        return Ok(Report::new(json, vec!["string", "approx_k", "program"], vec![row]));
    }
    let f = parse_function(&ctx, function.ok_or_else(|| anyhow!("pass --function or --string"))?)?;
    let mass = UniversalMass::from_index(&ctx, &index, form, g.cap)?;
    let i = ctx.function_index(&f);
    let mut json = mass_header(&mass);
    json.as_object_mut().expect("object").extend(
        mass_entry(&ctx, &mass, i)
            .as_object()
            .expect("object")
            .clone(),
    );
    let row = vec![
        f.display(&ctx),
        mass.estimates[i].value.to_string(),
        mass.normalised[i].to_string(),
        decimal(&mass.normalised[i]),
    ];
    Ok(Report::new(json, vec!["function", "approx_k", "normalised_mass", "decimal"], vec![row]))
}

fn mass(g: &Global, form: MassForm) -> Result<Report> {
    let ctx = g.context()?;
    let index = ProgramIndex::for_context(&ctx, g.budget()?)?;
    let mass = UniversalMass::from_index(&ctx, &index, form, g.cap)?;
    let entries: Vec<Value> = (0..mass.estimates.len()).map(|i| mass_entry(&ctx, &mass, i)).collect();
    let rows = (0..mass.estimates.len())
        .map(|i| {
            vec![
                ctx.function_at(i).display(&ctx),
                mass.estimates[i].value.to_string(),
                mass.raw[i].to_string(),
                mass.normalised[i].to_string(),
                decimal(&mass.normalised[i]),
            ]
        })
        .collect();
    let mut json = mass_header(&mass);
    json["entries"] = Value::Array(entries);
    Ok(Report::new(json, vec!["function", "approx_k", "raw_mass", "normalised_mass", "decimal"], rows))
}

fn summary(kind: &str, passed: bool, detail: String) -> Vec<Vec<String>> {
    vec![vec![kind.to_string(), passed.to_string(), detail]]
}

fn demo(g: &Global, kind: &DemoKind) -> Result<Report> {
    let ctx = g.context()?;
    let headers = vec!["demo", "passed", "detail"];
    match kind {
        DemoKind::Prop1 { dist } => {
            let p = parse_distribution(&ctx, dist, g)?;
            if block_witness(&p)?.is_none() {
                bail!("{} is block uniform, so no permuted enumeration can beat plain enumeration", p.provenance());
            }
            let r = demo_prop1(&p)?;
            let detail = format!("{} vs {}: {} > {}", "enumerative", r.permuted, r.enumerative_probability, r.permuted_probability);
            Ok(Report::new(serde_json::to_value(&r)?, headers, summary("prop1", r.certified, detail)).with_verdict(r.certified))
        }
        DemoKind::Universal { form } => {
            let r = demo_universal_free_lunch(&ctx, g.budget()?, *form, g.cap)?;
            let ok = r.status == nfl_lab::verify::UniversalStatus::Certified;
            let detail = format!("gap {}", r.gap);
            Ok(Report::new(serde_json::to_value(&r)?, headers, summary("universal", ok, detail)).with_verdict(ok))
        }
        DemoKind::Mptm { k, form, convention } => {
            let r = demo_mptm_free_lunch(&ctx, *k, g.budget()?, *form, *convention, g.cap)?;
            let detail = format!("E[a] - E[b] = {}", r.surrogate.gap);
            Ok(Report::new(serde_json::to_value(&r)?, headers, summary("mptm", r.passed, detail)).with_verdict(r.passed))
        }
        DemoKind::Worst { optimiser, measure } => {
            let a = optimiser.parse::<OptimiserSpec>()?.build(&ctx, g.budget()?)?;
            let m = parse_measure(measure)?;
            let w = find_worst(&a, &ctx, &*m, g.cap)?;
            let json = json!({
                "optimiser": a.label(),
                "measure": m.label(),
                "function": w.function.to_json(&ctx).values,
                "value": exact(&w.value),
            });
            let row = vec![a.label(), m.label(), w.function.display(&ctx), w.value.to_string()];
            Ok(Report::new(json, vec!["optimiser", "measure", "function", "value"], vec![row]))
        }
        DemoKind::Tree { optimiser } => {
            let a = optimiser.parse::<OptimiserSpec>()?.build(&ctx, g.budget()?)?;
            let tree = DecisionTree::from_optimiser(&*a, &ctx)?;
            let json = json!({ "optimiser": a.label(), "notation": tree.notation(), "tree": tree });
            let row = vec![a.label(), tree.notation()];
            Ok(Report::new(json, vec!["optimiser", "notation"], vec![row]))
        }
    }
}
