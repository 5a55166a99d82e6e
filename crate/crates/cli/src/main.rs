use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gkm_core::builtins;
use gkm_core::chen_ruan::{gkm_assemble, CRAlgebra, GKMTarget, LocalModel};
use gkm_core::frobenius::FrobeniusData;
use gkm_core::graph::{self, EvalOptions, Mode};
use gkm_core::group::{AxisChar, GroupData, SectorAction};
use gkm_core::psi::psi_intersection;
use gkm_core::rmatrix::{solve_qde, target_pmatrix, Boundary, RMatrix};
use gkm_core::series::{Matrix, TSeries, EXACT};
use gkm_core::{Error, ErrorClass, Rational, Result};

#[derive(Parser)]
#[command(
    name = "gkm",
    version,
    about = "Exact equivariant orbifold GW potentials of GKM targets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoundaryMode {
    /// full matrix without variables, odd diagonal with them
    Auto,
    Matrix,
    OddDiagonal,
}

#[derive(Args, Clone)]
struct TargetArgs {
    /// bundled target name or target JSON file
    #[arg(long)]
    target: Option<String>,
    /// single fixed point with a cyclic group, e.g. `3` or `2,2`
    #[arg(long)]
    cyclic: Option<String>,
    /// character table JSON for a single fixed point
    #[arg(long)]
    table: Option<PathBuf>,
    /// axis characters: `;`-separated exponent vectors (or character indices)
    #[arg(long, allow_hyphen_values = true)]
    chars: Option<String>,
    /// comma-separated weights, integers or `a/b`
    #[arg(long, allow_hyphen_values = true)]
    weights: Option<String>,
}

#[derive(Args, Clone)]
struct Common {
    #[command(flatten)]
    target: TargetArgs,
    /// bundled genus-zero data name or genus-zero JSON file
    #[arg(long)]
    genus_zero: Option<String>,
    /// R-matrix order K
    #[arg(long, default_value_t = 6)]
    z_order: usize,
    /// coordinate truncation degree D
    #[arg(long, default_value_t = 4)]
    t_degree: u32,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    #[arg(long, value_enum, default_value_t = BoundaryMode::Auto)]
    boundary: BoundaryMode,
}

#[derive(Subcommand)]
enum Command {
    /// Character table and orthogonality of a group
    Group {
        #[arg(long)]
        cyclic: Option<String>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Chen–Ruan algebra of a target
    Cr(Common),
    /// Quantum Riemann–Roch boundary or solved R-matrix
    Rmatrix {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        check_unitarity: bool,
    },
    /// ψ-class intersection number
    Psi {
        #[arg(long)]
        genus: u32,
        /// comma-separated exponents
        #[arg(long, default_value = "")]
        exponents: String,
    },
    /// Idempotents, Δ, Ψ and canonical coordinates of genus-zero data
    Frobenius(Common),
    /// Ancestor or descendent potential table
    Potential {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        genus: u32,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        max_height: u32,
        #[arg(long)]
        descendent: bool,
        #[arg(long)]
        shuffle_seed: Option<u64>,
    },
    /// Genus-one 1-form: closed form against the graph sum
    F1(Common),
    /// Run every consistency check on a target
    Check(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Validation => 3,
                ErrorClass::Internal => 4,
            })
        }
        Err(Failure::Checks(report)) => {
            emit(&report);
            ExitCode::from(3)
        }
    }
}

// a closed pipe (e.g. `| head`) is not an error
fn emit(out: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    if !out.ends_with('\n') {
        let _ = stdout.write_all(b"\n");
    }
}

enum Failure {
    Error(Error),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_list<T: std::str::FromStr>(s: &str, sep: char) -> Result<Vec<T>> {
    s.split(sep)
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<T>()
                .map_err(|_| config(format!("cannot parse `{x}`")))
        })
        .collect()
}

fn load_group(cyclic: Option<&str>, table: Option<&Path>) -> Result<GroupData> {
    match (cyclic, table) {
        (Some(c), None) => GroupData::abelian(&parse_list::<u32>(c, ',')?),
        (None, Some(t)) => GroupData::from_table_file(t),
        (None, None) => GroupData::abelian(&[]),
        _ => Err(config("give either --cyclic or --table")),
    }
}

fn load_target(t: &TargetArgs) -> Result<GKMTarget> {
    if let Some(spec) = &t.target {
        if t.cyclic.is_some() || t.table.is_some() || t.chars.is_some() || t.weights.is_some() {
            return Err(config(
                "--target excludes the inline --cyclic/--table/--chars/--weights",
            ));
        }
        return builtins::resolve_target(spec);
    }
    let group = load_group(t.cyclic.as_deref(), t.table.as_deref())?;
    let weights: Vec<Rational> = parse_list(
        t.weights
            .as_deref()
            .ok_or_else(|| config("need --target or --weights"))?,
        ',',
    )?;
    let axes: Vec<AxisChar> = match &t.chars {
        Some(c) => c
            .split(';')
            .map(|v| {
                let v: Vec<u32> = parse_list(v, ',')?;
                Ok(if group.is_abelian_builtin() {
                    AxisChar::Exponents(v)
                } else {
                    match v.as_slice() {
                        [a] => AxisChar::Character(*a as usize),
                        _ => return Err(config("table actions name one character per axis")),
                    }
                })
            })
            .collect::<Result<_>>()?,
        None if group.num_classes() == 1 => {
            let zeros = vec![0; group.factors().map_or(0, <[u32]>::len)];
            vec![AxisChar::Exponents(zeros); weights.len()]
        }
        None => return Err(config("need --chars for a nontrivial group")),
    };
    let action = SectorAction::new(&group, axes, weights)?;
    GKMTarget::new(vec![LocalModel::new(group, action)])
}

struct Loaded {
    target: GKMTarget,
    algebra: CRAlgebra,
    data: FrobeniusData,
}

fn load(c: &Common) -> Result<Loaded> {
    if let Some(gz) = &c.genus_zero {
        if builtins::genus_zero_names().any(|n| n == gz) {
            if c.target.target.is_some() || c.target.weights.is_some() {
                return Err(config("bundled genus-zero data carries its own target"));
            }
            let (target, data) = builtins::genus_zero(gz, c.t_degree)?;
            let algebra = data.algebra().clone();
            return Ok(Loaded {
                target,
                algebra,
                data,
            });
        }
        let target = load_target(&c.target)?;
        let algebra = gkm_assemble(&target)?;
        let data = FrobeniusData::load_file(&algebra, Path::new(gz), c.t_degree)?;
        return Ok(Loaded {
            target,
            algebra,
            data,
        });
    }
    let target = load_target(&c.target)?;
    let algebra = gkm_assemble(&target)?;
    let data = FrobeniusData::classical(&algebra);
    Ok(Loaded {
        target,
        algebra,
        data,
    })
}

fn boundary(c: &Common, l: &Loaded, order: usize) -> Boundary {
    let p = target_pmatrix(&l.target, order);
    let odd = match c.boundary {
        BoundaryMode::Auto => l.data.t_vars() > 0,
        BoundaryMode::Matrix => false,
        BoundaryMode::OddDiagonal => true,
    };
    if odd {
        Boundary::odd_diagonal_of(&p)
    } else {
        Boundary::Matrix(p)
    }
}

fn solve(c: &Common, l: &Loaded, order: usize) -> Result<RMatrix> {
    solve_qde(&l.data, &boundary(c, l, order), order)
}

fn series_json(s: &TSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(m, c)| json!({"exponents": m, "value": c.to_string()}))
        .collect();
    let prec = if s.prec() == EXACT {
        Value::Null
    } else {
        json!(s.prec())
    };
    json!({"precision": prec, "terms": terms})
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| series_json(m.get(i, j))).collect()))
            .collect(),
    )
}

fn show(s: &TSeries, names: &[String]) -> String {
    let body = s.display_with(names);
    if s.prec() == EXACT {
        body
    } else {
        format!("{body} + O({})", s.prec())
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render(
    format: Format,
    json: Value,
    csv: impl FnOnce() -> String,
    pretty: impl FnOnce() -> String,
) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&json).expect("serializable"),
        Format::Csv => csv(),
        Format::Pretty => pretty(),
    }
}

fn run(cmd: Command) -> std::result::Result<String, Failure> {
    Ok(match cmd {
        Command::Group {
            cyclic,
            table,
            format,
        } => cmd_group(cyclic.as_deref(), table.as_deref(), format)?,
        Command::Cr(c) => cmd_cr(&c)?,
        Command::Rmatrix {
            common,
            check_unitarity,
        } => return cmd_rmatrix(&common, check_unitarity),
        Command::Psi { genus, exponents } => {
            let e: Vec<u32> = parse_list(&exponents, ',')?;
            psi_intersection(genus, &e).to_string()
        }
        Command::Frobenius(c) => cmd_frobenius(&c)?,
        Command::Potential {
            common,
            genus,
            k,
            max_height,
            descendent,
            shuffle_seed,
        } => cmd_potential(&common, genus, k, max_height, descendent, shuffle_seed)?,
        Command::F1(c) => return cmd_f1(&c),
        Command::Check(c) => return cmd_check(&c),
    })
}

fn cmd_group(cyclic: Option<&str>, table: Option<&Path>, format: Format) -> Result<String> {
    let g = load_group(cyclic, table)?;
    let orth = g.check_orthogonality().is_ok();
    let k = g.num_classes();
    let classes: Vec<Value> = g
        .classes()
        .iter()
        .map(|c| json!({"label": c.label, "size": c.size, "centralizer": c.centralizer}))
        .collect();
    let chars: Vec<Value> = (0..k)
        .map(|a| {
            json!({
                "label": g.character_label(a),
                "values": (0..k).map(|h| g.character(a, h).to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(render(
        format,
        json!({"order": g.order(), "classes": classes, "characters": chars, "orthogonality": orth}),
        || {
            let mut s = String::from("character");
            for c in g.classes() {
                s.push_str(&format!(",{}", c.label));
            }
            s.push('\n');
            for a in 0..k {
                s.push_str(g.character_label(a));
                for h in 0..k {
                    s.push_str(&format!(",\"{}\"", g.character(a, h)));
                }
                s.push('\n');
            }
            s
        },
        || {
            let mut s = format!("|G| = {}, {} classes\n", g.order(), k);
            for c in g.classes() {
                s.push_str(&format!(
                    "  class {} size {} centralizer {}\n",
                    c.label, c.size, c.centralizer
                ));
            }
            for a in 0..k {
                let vals: Vec<String> = (0..k).map(|h| g.character(a, h).to_string()).collect();
                s.push_str(&format!(
                    "  {}: [{}]\n",
                    g.character_label(a),
                    vals.join(", ")
                ));
            }
            s.push_str(&format!("orthogonality: {}\n", pass(orth)));
            s
        },
    ))
}

fn cmd_cr(c: &Common) -> Result<String> {
    let target = load_target(&c.target)?;
    let alg = gkm_assemble(&target)?;
    let verified = alg.verify();
    let n = alg.rank();
    let sectors: Vec<Value> = (0..n)
        .map(|i| json!({"sector": alg.sector_name(i), "age": alg.age(i).to_string()}))
        .collect();
    let gram: Vec<Vec<String>> = alg
        .gram_bar()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect();
    let canon: Vec<Value> = (0..n)
        .map(|mu| {
            json!({
                "name": alg.canonical_name(mu),
                "delta0": alg.delta0(mu).to_string(),
                "sqrt_delta0": alg.sqrt_delta0(mu).to_string(),
            })
        })
        .collect();
    Ok(render(
        c.format,
        json!({
            "rank": n,
            "sectors": sectors,
            "gram_bar": gram,
            "canonical": canon,
            "weights_distinct": target.weights_distinct(),
            "checks": verified.is_ok(),
        }),
        || {
            let mut s = String::from("sector,age\n");
            for i in 0..n {
                s.push_str(&format!("{},{}\n", alg.sector_name(i), alg.age(i)));
            }
            s
        },
        || {
            let mut s = format!("rank {n}\n");
            for i in 0..n {
                s.push_str(&format!("  {}  age {}\n", alg.sector_name(i), alg.age(i)));
            }
            s.push_str("pairing (bar basis):\n");
            for r in &gram {
                s.push_str(&format!("  [{}]\n", r.join(", ")));
            }
            for mu in 0..n {
                s.push_str(&format!(
                    "  {}  Δ(0) = {}  √Δ(0) = {}\n",
                    alg.canonical_name(mu),
                    alg.delta0(mu),
                    alg.sqrt_delta0(mu)
                ));
            }
            s.push_str(&format!(
                "idempotents, orthonormality, unit, associativity, Frobenius: {}\n",
                match &verified {
                    Ok(()) => "PASS".to_string(),
                    Err(e) => format!("FAIL ({e})"),
                }
            ));
            s
        },
    ))
}

fn rmatrix_report(r: &RMatrix, names: &[String], format: Format) -> String {
    let n = r.rank();
    render(
        format,
        json!({"order": r.order(), "coefficients": r.coeffs().iter().map(matrix_json).collect::<Vec<_>>()}),
        || {
            let mut s = String::from("k,row,col,value\n");
            for (k, m) in r.coeffs().iter().enumerate() {
                for i in 0..n {
                    for j in 0..n {
                        s.push_str(&format!("{k},{i},{j},\"{}\"\n", show(m.get(i, j), names)));
                    }
                }
            }
            s
        },
        || {
            let mut s = String::new();
            for (k, m) in r.coeffs().iter().enumerate() {
                s.push_str(&format!("R_{k}:\n"));
                for i in 0..n {
                    let row: Vec<String> = (0..n).map(|j| show(m.get(i, j), names)).collect();
                    s.push_str(&format!("  [{}]\n", row.join(", ")));
                }
            }
            s
        },
    )
}

fn cmd_rmatrix(c: &Common, check: bool) -> std::result::Result<String, Failure> {
    let l = load(c)?;
    let r = solve(c, &l, c.z_order)?;
    let mut out = rmatrix_report(&r, l.data.var_names(), c.format);
    if check {
        match r.unitarity_check() {
            Ok(()) => out.push_str(&format!("\nunitarity to order {}: PASS\n", r.order())),
            Err(k) => {
                out.push_str(&format!("\nunitarity: FAIL at order {k}\n"));
                return Err(Failure::Checks(out));
            }
        }
    }
    Ok(out)
}

fn cmd_frobenius(c: &Common) -> Result<String> {
    let l = load(c)?;
    let d = &l.data;
    let n = d.rank();
    let names = d.var_names();
    let checks = json!({
        "idempotents": d.check_idempotents(),
        "psi_orthogonal": d.check_psi_orthogonal(),
        "canonical_pairing": d.check_canonical_pairing(),
        "inverse_sqrt_delta": d.inverse_sqrt_delta_check().is_ok(),
    });
    let per: Vec<Value> = (0..n)
        .map(|i| {
            json!({
                "index": l.algebra.canonical_name(i),
                "delta": series_json(d.delta(i)),
                "sqrt_delta": series_json(d.sqrt_delta(i)),
                "u": series_json(d.u(i)),
                "idempotent": d.idempotent(i).iter().map(series_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(render(
        c.format,
        json!({"variables": names, "canonical": per, "psi": matrix_json(d.psi()), "checks": checks}),
        || {
            let mut s = String::from("index,quantity,value\n");
            for i in 0..n {
                s.push_str(&format!("{i},delta,\"{}\"\n", show(d.delta(i), names)));
                s.push_str(&format!("{i},u,\"{}\"\n", show(d.u(i), names)));
            }
            s
        },
        || {
            let mut s = format!("rank {n}, variables [{}]\n", names.join(", "));
            for i in 0..n {
                s.push_str(&format!("{}:\n", l.algebra.canonical_name(i)));
                s.push_str(&format!("  Δ  = {}\n", show(d.delta(i), names)));
                s.push_str(&format!("  √Δ = {}\n", show(d.sqrt_delta(i), names)));
                s.push_str(&format!("  u  = {}\n", show(d.u(i), names)));
            }
            s.push_str(&format!(
                "idempotents {}, Ψ orthogonal {}, canonical pairing {}, 1/√Δ expansion {}\n",
                pass(d.check_idempotents()),
                pass(d.check_psi_orthogonal()),
                pass(d.check_canonical_pairing()),
                pass(d.inverse_sqrt_delta_check().is_ok())
            ));
            s
        },
    ))
}

fn cmd_potential(
    c: &Common,
    genus: u32,
    k: usize,
    max_height: u32,
    descendent: bool,
    shuffle_seed: Option<u64>,
) -> Result<String> {
    if 2 * genus as i64 - 2 + k as i64 <= 0 {
        return Err(Error::Unstable(genus, k as u32));
    }
    let l = load(c)?;
    let r = solve(c, &l, c.z_order)?;
    let mode = if descendent {
        Mode::Descendent
    } else {
        Mode::Ancestor
    };
    let opts = EvalOptions {
        shuffle_seed,
        leaf_permutation: None,
    };
    let table = graph::potential(genus, k, &l.data, &r, max_height, mode, &opts)?;
    Ok(match c.format {
        Format::Json => table.to_json(),
        Format::Csv => table.to_csv(),
        Format::Pretty => table.to_pretty(&|mu| l.algebra.canonical_name(mu).to_string()),
    })
}

/// closed form, three graphs, full graph sum
type F1Forms = (Loaded, Vec<TSeries>, Vec<TSeries>, Vec<TSeries>);

fn f1_forms(c: &Common) -> Result<F1Forms> {
    let l = load(c)?;
    let r = solve(c, &l, c.z_order.max(1))?;
    let closed = graph::f10_closed_form(&l.data, &r)?;
    let three = graph::f10_graph_check(&l.data, &r)?;
    let full = graph::genus_one_ancestor(&l.data, &r, &EvalOptions::default())?;
    Ok((l, closed, three, full))
}

fn cmd_f1(c: &Common) -> std::result::Result<String, Failure> {
    let (l, closed, three, full) = f1_forms(c)?;
    let names = l.data.var_names();
    let ok = closed == three && three == full;
    let rows: Vec<Value> = (0..closed.len())
        .map(|j| {
            json!({
                "direction": j,
                "closed_form": series_json(&closed[j]),
                "three_graphs": series_json(&three[j]),
                "graph_sum": series_json(&full[j]),
            })
        })
        .collect();
    let out = render(
        c.format,
        json!({"coframe": "du", "components": rows, "agree": ok}),
        || {
            let mut s = String::from("direction,closed_form,graph_sum\n");
            for j in 0..closed.len() {
                s.push_str(&format!(
                    "{j},\"{}\",\"{}\"\n",
                    show(&closed[j], names),
                    show(&full[j], names)
                ));
            }
            s
        },
        || {
            let mut s = String::from("dF_{1,0} in the du coframe\n");
            for j in 0..closed.len() {
                s.push_str(&format!("  du^{j}: {}\n", show(&closed[j], names)));
            }
            s.push_str(&format!(
                "closed form = three graphs = graph sum: {}\n",
                pass(ok)
            ));
            s
        },
    );
    if ok {
        Ok(out)
    } else {
        Err(Failure::Checks(out))
    }
}

fn cmd_check(c: &Common) -> std::result::Result<String, Failure> {
    let l = load(c)?;
    let mut lines = Vec::new();
    let mut all = true;
    let mut record = |name: &str, ok: bool| {
        all &= ok;
        lines.push(format!("{}  {name}", pass(ok)));
    };
    record("Chen-Ruan algebra", l.algebra.verify().is_ok());
    record("idempotents", l.data.check_idempotents());
    record("Psi orthogonal", l.data.check_psi_orthogonal());
    record("canonical pairing", l.data.check_canonical_pairing());
    record(
        "1/sqrt(Delta) expansion",
        l.data.inverse_sqrt_delta_check().is_ok(),
    );
    let order = c.z_order.max(1);
    match solve(c, &l, order) {
        Ok(r) => {
            record("unitarity", r.unitarity_check().is_ok());
            let closed = graph::f10_closed_form(&l.data, &r);
            let three = graph::f10_graph_check(&l.data, &r);
            let full = graph::genus_one_ancestor(&l.data, &r, &EvalOptions::default());
            let ok = matches!((&closed, &three, &full), (Ok(a), Ok(b), Ok(f)) if a == b && b == f);
            record("genus-one closed form vs graph sum", ok);
        }
        Err(e) => {
            record(&format!("R-matrix ({e})"), false);
        }
    }
    let out = lines.join("\n") + "\n";
    if all {
        Ok(out)
    } else {
        Err(Failure::Checks(out))
    }
}
