//! Command-line frontend: generate class sets, reproduce the count
//! tables, run the forbidden-substructure search, and verify the shipped
//! fixtures. Exit codes: 0 success, 1 usage error, 2 verification
//! mismatch.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use iposets::enumerate::{
    all_posets, all_posets_up_to, checkpoint_load, checkpoint_save, decorate_iposets,
    discrete_counts, sp_closure, GenMode, GpMemo,
};
use iposets::forbidden::{contains_induced, is_gp, known_forbidden, minimal_forbidden};
use iposets::iso::{isomorphic, read_classes};
use iposets::{format, Iposet, MAX_POINTS};

mod tables;

use tables::{render_columns, render_triangle, triangle_csv};

#[derive(Parser)]
#[command(name = "iposets", version, about = "Gluing-parallel (i)poset toolbox")]
struct Cli {
    /// Worker threads for generation; defaults to all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Checkpoint directory: filled memo cells are loaded from and saved
    /// back to it.
    #[arg(long, global = true, env = "IPOSETS_MEMO_DIR")]
    memo_dir: Option<PathBuf>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; defaults to `lines` for class output and `table`
    /// for counts.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Lines,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Generate isomorphism-reduced class sets.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Close a generator set under compositions.
    Closure {
        #[command(subcommand)]
        kind: ClosureKind,
    },
    /// Print count tables.
    Counts(CountsArgs),
    /// Search for minimal non-gluing-parallel substructures.
    Forbidden {
        #[arg(long)]
        max_n: usize,
    },
    /// Re-check shipped data; `--against fixtures` validates the known
    /// forbidden substructures.
    Verify {
        #[arg(long)]
        against: String,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    /// Gluing-parallel iposets G_n(k,l).
    Gp(GenArgs),
    /// Gluing-parallel Winkowski iposets.
    Wink(GenArgs),
    /// All posets on n points.
    Posets {
        #[arg(long)]
        n: usize,
    },
    /// All iposets on n points (posets decorated with interfaces).
    Iposets {
        #[arg(long)]
        n: usize,
        /// Keep interface-consistent iposets only.
        #[arg(long)]
        ic: bool,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Source arity; omit to emit every cell.
    #[arg(long)]
    k: Option<usize>,
    /// Target arity; omit to emit every cell.
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Subcommand)]
enum ClosureKind {
    /// Serial-parallel closure of generator posets read from a class file.
    Sp {
        #[arg(long)]
        gens: PathBuf,
        #[arg(long)]
        max_n: usize,
    },
}

#[derive(Args)]
struct CountsArgs {
    #[arg(long, value_enum)]
    table: TableKind,
    #[arg(long)]
    n: usize,
    /// Family for `--table split`.
    #[arg(long, value_enum)]
    mode: Option<SplitMode>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableKind {
    /// Posets, sp-posets, interval orders, their union, sp-interval orders.
    Spio,
    /// Posets, sp, gp, iposets, interface-consistent, gp-iposets.
    Gpi,
    /// Discrete iposet families from the closed forms.
    Discrete,
    /// Winkowski families.
    Wink,
    /// One family split by source and target arity.
    Split,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitMode {
    Gp,
    Wink,
    Ip,
    Ici,
    Wip,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> io::Result<ExitCode> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(fs::File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let code = dispatch(cli, &mut out)?;
    out.flush()?;
    Ok(code)
}

fn usage(msg: &str) -> io::Error {
    io::Error::other(msg.to_string())
}

fn check_n(n: usize) -> io::Result<()> {
    if n > MAX_POINTS {
        return Err(usage(&format!("n={n} exceeds the {MAX_POINTS}-point cap")));
    }
    Ok(())
}

/// Loads the memo for a mode, honoring `--memo-dir`; cell reports go to
/// stderr.
fn open_memo(cli: &Cli, mode: GenMode) -> io::Result<GpMemo> {
    match &cli.memo_dir {
        Some(dir) if dir.is_dir() => {
            let (memo, reports) = checkpoint_load(dir, mode)?;
            for r in reports {
                eprintln!("checkpoint: {r}");
            }
            Ok(memo)
        }
        _ => Ok(GpMemo::new(mode)),
    }
}

fn close_memo(cli: &Cli, memo: &GpMemo) -> io::Result<()> {
    if let Some(dir) = &cli.memo_dir {
        checkpoint_save(memo, dir)?;
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> io::Result<ExitCode> {
    match &cli.command {
        Command::Gen { family } => gen(cli, family, out)?,
        Command::Closure { kind } => closure(cli, kind, out)?,
        Command::Counts(args) => counts(cli, args, out)?,
        Command::Forbidden { max_n } => forbidden(cli, *max_n, out)?,
        Command::Verify { against } => return verify(against, out),
    }
    Ok(ExitCode::SUCCESS)
}

fn class_format(cli: &Cli) -> OutFormat {
    cli.format.unwrap_or(OutFormat::Lines)
}

fn counts_format(cli: &Cli) -> io::Result<OutFormat> {
    match cli.format.unwrap_or(OutFormat::Table) {
        OutFormat::Lines => Err(usage(
            "format `lines` holds classes; counts support csv|table",
        )),
        f => Ok(f),
    }
}

fn write_cell(
    out: &mut dyn Write,
    n: usize,
    k: usize,
    l: usize,
    classes: &[Iposet],
) -> io::Result<()> {
    writeln!(out, "# n={n} k={k} l={l} classes={}", classes.len())?;
    let mut lines: Vec<String> = classes.iter().map(format::to_line).collect();
    lines.sort_unstable();
    for line in lines {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn gen(cli: &Cli, family: &GenFamily, out: &mut dyn Write) -> io::Result<()> {
    match family {
        GenFamily::Gp(args) | GenFamily::Wink(args) => {
            check_n(args.n)?;
            let mode = if matches!(family, GenFamily::Gp(_)) {
                GenMode::Gp
            } else {
                GenMode::Winkowski
            };
            let memo = open_memo(cli, mode)?;
            let n = args.n;
            let cells: Vec<(usize, usize)> = match (args.k, args.l) {
                (Some(k), Some(l)) => {
                    if k > n || l > n {
                        return Err(usage("interface arities cannot exceed n"));
                    }
                    vec![(k, l)]
                }
                (None, None) => (0..=n).flat_map(|k| (0..=n).map(move |l| (k, l))).collect(),
                _ => return Err(usage("--k and --l must be given together")),
            };
            match class_format(cli) {
                OutFormat::Lines => {
                    for &(k, l) in &cells {
                        let classes = memo.cell(n, k, l);
                        write_cell(out, n, k, l, &classes)?;
                    }
                }
                OutFormat::Csv => {
                    writeln!(out, "n,k,l,count")?;
                    for &(k, l) in &cells {
                        writeln!(out, "{n},{k},{l},{}", memo.cell_count(n, k, l))?;
                    }
                }
                OutFormat::Table => {
                    let title = match mode {
                        GenMode::Gp => format!("GPI({n})"),
                        GenMode::Winkowski => format!("GPWI({n})"),
                    };
                    write!(out, "{}", render_triangle(&title, memo.count_matrix(n)))?;
                }
            }
            close_memo(cli, &memo)?;
        }
        GenFamily::Posets { n } => {
            check_n(*n)?;
            let classes = all_posets(*n);
            match class_format(cli) {
                OutFormat::Lines => {
                    let mut buf = Vec::new();
                    iposets::iso::write_classes(&mut buf, &classes)?;
                    out.write_all(&buf)?;
                }
                OutFormat::Csv => {
                    writeln!(out, "n,count")?;
                    writeln!(out, "{n},{}", classes.len())?;
                }
                OutFormat::Table => {
                    write!(
                        out,
                        "{}",
                        render_columns(&["n", "P"], &[vec![*n, classes.len()]])
                    )?;
                }
            }
        }
        GenFamily::Iposets { n, ic } => {
            check_n(*n)?;
            let classes = decorate_iposets(&all_posets(*n), *ic);
            match class_format(cli) {
                OutFormat::Lines => {
                    let mut buf = Vec::new();
                    iposets::iso::write_classes(&mut buf, &classes)?;
                    out.write_all(&buf)?;
                }
                OutFormat::Csv => {
                    writeln!(out, "n,k,l,count")?;
                    for k in 0..=*n {
                        for l in 0..=*n {
                            let c = classes
                                .iter()
                                .filter(|i| i.src() == k && i.tgt() == l)
                                .count();
                            writeln!(out, "{n},{k},{l},{c}")?;
                        }
                    }
                }
                OutFormat::Table => {
                    let matrix = split_matrix(&classes, *n);
                    let title = format!("{}({n})", if *ic { "ICI" } else { "IP" });
                    write!(out, "{}", render_triangle(&title, matrix))?;
                }
            }
        }
    }
    Ok(())
}

fn split_matrix(classes: &[Iposet], n: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0usize; n + 1]; n + 1];
    for ip in classes {
        m[ip.src()][ip.tgt()] += 1;
    }
    m
}

fn closure(cli: &Cli, kind: &ClosureKind, out: &mut dyn Write) -> io::Result<()> {
    let ClosureKind::Sp { gens, max_n } = kind;
    check_n(*max_n)?;
    let file = fs::File::open(gens)?;
    let generators = read_classes(io::BufReader::new(file)).map_err(io::Error::other)?;
    if generators.is_empty() {
        return Err(usage("generator file holds no posets"));
    }
    if let Some(bad) = generators
        .iter()
        .find(|g| g.n() == 0 || g.src() != 0 || g.tgt() != 0)
    {
        return Err(usage(&format!(
            "generators must be non-empty posets without interfaces, got `{bad}`"
        )));
    }
    let levels = sp_closure(&generators, *max_n);
    match cli.format.unwrap_or(OutFormat::Table) {
        OutFormat::Lines => {
            for classes in &levels {
                let mut buf = Vec::new();
                iposets::iso::write_classes(&mut buf, classes)?;
                out.write_all(&buf)?;
            }
        }
        OutFormat::Csv => {
            writeln!(out, "n,count")?;
            for (n, classes) in levels.iter().enumerate() {
                writeln!(out, "{n},{}", classes.len())?;
            }
        }
        OutFormat::Table => {
            let rows: Vec<Vec<usize>> = levels
                .iter()
                .enumerate()
                .map(|(n, c)| vec![n, c.len()])
                .collect();
            write!(out, "{}", render_columns(&["n", "closure"], &rows))?;
        }
    }
    Ok(())
}

/// Rows of the n-indexed summary tables, built from shared corpora.
struct Corpus {
    posets: Vec<Vec<Iposet>>,
}

impl Corpus {
    fn up_to(n: usize) -> Corpus {
        Corpus {
            posets: all_posets_up_to(n),
        }
    }
}

fn counts(cli: &Cli, args: &CountsArgs, out: &mut dyn Write) -> io::Result<()> {
    check_n(args.n)?;
    let fmt = counts_format(cli)?;
    let n = args.n;
    match args.table {
        TableKind::Spio => {
            let corpus = Corpus::up_to(n);
            let intervals: Vec<Iposet> = corpus
                .posets
                .iter()
                .flatten()
                .filter(|p| p.n() > 0 && p.classify().is_interval)
                .cloned()
                .collect();
            let spio = sp_closure(&intervals, n);
            let rows: Vec<Vec<usize>> = (0..=n)
                .map(|i| {
                    let level = &corpus.posets[i];
                    let flags: Vec<_> = level.iter().map(|p| p.classify()).collect();
                    let sp = flags.iter().filter(|f| f.is_sp).count();
                    let io_ = flags.iter().filter(|f| f.is_interval).count();
                    let both = flags.iter().filter(|f| f.is_sp || f.is_interval).count();
                    vec![i, level.len(), sp, io_, both, spio[i].len()]
                })
                .collect();
            write_summary(out, fmt, &["n", "P", "SP", "IO", "SP+IO", "SPIO"], &rows)
        }
        TableKind::Gpi => {
            let corpus = Corpus::up_to(n);
            let memo = open_memo(cli, GenMode::Gp)?;
            let rows: Vec<Vec<usize>> = (0..=n)
                .map(|i| {
                    let level = &corpus.posets[i];
                    let sp = level.iter().filter(|p| p.classify().is_sp).count();
                    let ip = decorate_iposets(level, false).len();
                    let ici = decorate_iposets(level, true).len();
                    vec![
                        i,
                        level.len(),
                        sp,
                        memo.cell_count(i, 0, 0),
                        ip,
                        ici,
                        memo.total(i),
                    ]
                })
                .collect();
            close_memo(cli, &memo)?;
            write_summary(out, fmt, &["n", "P", "SP", "GP", "IP", "ICI", "GPI"], &rows)
        }
        TableKind::Discrete => {
            let rows: Vec<Vec<usize>> = (0..=n)
                .map(|i| {
                    let c = discrete_counts(i);
                    vec![
                        i,
                        c.discrete as usize,
                        c.gp_discrete as usize,
                        c.starters as usize,
                        c.gp_starters as usize,
                    ]
                })
                .collect();
            write_summary(out, fmt, &["n", "D", "GPD", "S", "GPS"], &rows)
        }
        TableKind::Wink => {
            let corpus = Corpus::up_to(n);
            let gp = open_memo(cli, GenMode::Gp)?;
            let wink = open_memo(cli, GenMode::Winkowski)?;
            let rows: Vec<Vec<usize>> = (0..=n)
                .map(|i| {
                    let level = &corpus.posets[i];
                    let decorated = decorate_iposets(level, false);
                    let winks: Vec<_> = decorated
                        .iter()
                        .map(Iposet::classify)
                        .filter(|f| f.is_left_winkowski && f.is_right_winkowski)
                        .collect();
                    let icw = winks.iter().filter(|f| f.is_interface_consistent).count();
                    vec![
                        i,
                        level.len(),
                        decorated.len(),
                        gp.total(i),
                        winks.len(),
                        icw,
                        wink.total(i),
                    ]
                })
                .collect();
            close_memo(cli, &gp)?;
            close_memo(cli, &wink)?;
            write_summary(
                out,
                fmt,
                &["n", "P", "IP", "GPI", "WIP", "ICW", "GPWI"],
                &rows,
            )
        }
        TableKind::Split => {
            let mode = args
                .mode
                .ok_or_else(|| usage("--table split requires --mode gp|wink|ip|ici|wip"))?;
            let (title, matrix) = match mode {
                SplitMode::Gp => {
                    let memo = open_memo(cli, GenMode::Gp)?;
                    let m = memo.count_matrix(n);
                    close_memo(cli, &memo)?;
                    (format!("GPI({n})"), m)
                }
                SplitMode::Wink => {
                    let memo = open_memo(cli, GenMode::Winkowski)?;
                    let m = memo.count_matrix(n);
                    close_memo(cli, &memo)?;
                    (format!("GPWI({n})"), m)
                }
                SplitMode::Ip => (
                    format!("IP({n})"),
                    split_matrix(&decorate_iposets(&all_posets(n), false), n),
                ),
                SplitMode::Ici => (
                    format!("ICI({n})"),
                    split_matrix(&decorate_iposets(&all_posets(n), true), n),
                ),
                SplitMode::Wip => {
                    let decorated = decorate_iposets(&all_posets(n), false);
                    let winks: Vec<Iposet> = decorated
                        .into_iter()
                        .filter(|ip| {
                            let f = ip.classify();
                            f.is_left_winkowski && f.is_right_winkowski
                        })
                        .collect();
                    (format!("WIP({n})"), split_matrix(&winks, n))
                }
            };
            match fmt {
                OutFormat::Csv => write!(out, "{}", triangle_csv(n, &matrix)),
                OutFormat::Table => write!(out, "{}", render_triangle(&title, matrix)),
                OutFormat::Lines => unreachable!(),
            }?;
            Ok(())
        }
    }
}

fn write_summary(
    out: &mut dyn Write,
    fmt: OutFormat,
    headers: &[&str],
    rows: &[Vec<usize>],
) -> io::Result<()> {
    match fmt {
        OutFormat::Csv => {
            writeln!(out, "{}", headers.join(","))?;
            for row in rows {
                let cells: Vec<String> = row.iter().map(usize::to_string).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
            Ok(())
        }
        OutFormat::Table => write!(out, "{}", render_columns(headers, rows)),
        OutFormat::Lines => unreachable!(),
    }
}

fn forbidden(cli: &Cli, max_n: usize, out: &mut dyn Write) -> io::Result<()> {
    check_n(max_n)?;
    let memo = open_memo(cli, GenMode::Gp)?;
    let found = minimal_forbidden(max_n, &memo);
    close_memo(cli, &memo)?;
    writeln!(
        out,
        "# minimal forbidden substructures up to n={max_n}: {}",
        found.len()
    )?;
    let mut buf = Vec::new();
    iposets::iso::write_classes(&mut buf, found.members())?;
    out.write_all(&buf)?;
    Ok(())
}

fn verify(against: &str, out: &mut dyn Write) -> io::Result<ExitCode> {
    if against != "fixtures" {
        return Err(usage("only `--against fixtures` is supported"));
    }
    let fixtures = known_forbidden();
    let mut ok = true;
    let mut check = |label: String, pass: bool| -> io::Result<()> {
        ok &= pass;
        writeln!(
            out,
            "{} {}",
            if pass { "ok      " } else { "MISMATCH" },
            label
        )
    };
    check("fixture count is 11".into(), fixtures.len() == 11)?;
    let sizes: Vec<usize> = fixtures.iter().map(Iposet::n).collect();
    check(
        "sizes are five 6-point, one 8-point, five 10-point".into(),
        sizes == [6, 6, 6, 6, 6, 8, 10, 10, 10, 10, 10],
    )?;
    for (i, f) in fixtures.iter().enumerate() {
        check(
            format!("fixture {i} (n={}) is not gluing-parallel", f.n()),
            !is_gp(f),
        )?;
    }
    for (i, a) in fixtures.iter().enumerate() {
        for (j, b) in fixtures.iter().enumerate() {
            if i == j {
                continue;
            }
            if a.n() == b.n() {
                if j < i {
                    check(
                        format!("fixtures {j},{i} are non-isomorphic"),
                        !isomorphic(a, b),
                    )?;
                }
            } else if a.n() < b.n() {
                check(
                    format!("fixture {i} is not induced in fixture {j}"),
                    !contains_induced(b, a),
                )?;
            }
        }
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
