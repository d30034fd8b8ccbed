//! Command-line front end for the primitive-divisor verification pipeline.
//!
//! Exit codes: 0 success (check: primitive divisor present; verify: the
//! full conclusion), 1 negative result (no primitive divisor / exception
//! found), 2 invalid pair or arguments, 3 inconclusive.

mod cache;
mod report;

use clap::{Parser, Subcommand};
use primdiv::realcf::{self, PrecisionPolicy};
use primdiv::sequences::{self, SequencePair};
use primdiv::verifier::{self, Conclusion, VerifyOptions};
use report::Format;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(
    name = "primdiv",
    version,
    about = "Primitive divisors of Lucas and Lehmer sequences: screening, verification, and table reproduction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for the polynomial cache (PRIMDIV_CACHE_DIR overrides)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Starting ball precision in bits
    #[arg(long, global = true, default_value_t = 128)]
    prec_start: u32,
    /// Precision cap in bits
    #[arg(long, global = true, default_value_t = 4096)]
    prec_max: u32,
    /// Worker threads for sweeps (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Omit the timestamp field from JSON reports
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether u_n has a primitive divisor, exactly
    Check {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long)]
        n: u64,
    },
    /// Run the full pipeline for one pair
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long, default_value_t = 20_000_000_000)]
        n_cap: u64,
    },
    /// Reproduce the convergent table for (p, q) = (-3, 2)
    Table1,
    /// Reproduce the n_q cutoff table
    Table2 {
        #[arg(long, default_value_t = 50)]
        q_max: i64,
    },
    /// Verify every valid pair with q in [q-lo, q-hi]
    Scan {
        #[arg(long)]
        q_lo: i64,
        #[arg(long)]
        q_hi: i64,
        #[arg(long, default_value_t = 20_000_000_000)]
        n_cap: u64,
    },
    /// List the continued-fraction convergents of the pair's angle
    Convergents {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long)]
        q: i64,
        #[arg(long, default_value_t = 20_000_000_000)]
        n_cap: u64,
    },
    /// Build or verify the on-disk polynomial cache
    GnCache {
        #[arg(long)]
        n_max: u64,
        /// Only validate existing files
        #[arg(long)]
        verify: bool,
    },
}

fn emit(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn timestamp(disabled: bool) -> Option<u64> {
    if disabled {
        None
    } else {
        Some(
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    }
}

fn pair_or_exit(p: i64, q: i64) -> Result<SequencePair, ExitCode> {
    SequencePair::new(p, q).map_err(|e| {
        eprintln!("invalid pair ({p}, {q}): {e}");
        ExitCode::from(2)
    })
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cache_dir = std::env::var_os("PRIMDIV_CACHE_DIR")
        .map(PathBuf::from)
        .or(cli.cache_dir.clone());
    if let Some(dir) = &cache_dir {
        let (ok, bad) = cache::load_dir(dir);
        if ok + bad > 0 {
            eprintln!("cache: {ok} installed, {bad} rejected");
        }
    }
    let policy = PrecisionPolicy::new(cli.prec_start, cli.prec_max);
    if let Some(jobs) = cli.jobs {
        rayon_pool(jobs);
    }
    let ts = timestamp(cli.no_timestamp);

    let code = match &cli.command {
        Command::Check { p, q, n } => {
            let pair = match pair_or_exit(*p, *q) {
                Ok(pair) => pair,
                Err(code) => return Ok(code),
            };
            if *n < 2 {
                eprintln!("primitive divisors are defined from n = 2 on");
                return Ok(ExitCode::from(2));
            }
            let value = sequences::element(&pair, *n).value;
            let digits = value.to_string().trim_start_matches('-').len();
            let screen = if *n > 12 {
                format!("{:?}", sequences::stewart_screen(&pair, *n))
            } else {
                "NotApplicable".into()
            };
            let has = sequences::has_primitive_divisor(&pair, *n);
            let verdict = if has {
                "primitive divisor present"
            } else {
                "no primitive divisor"
            };
            let mut msg =
                format!("u_{n} has {digits} digit(s); screen: {screen}; definition: {verdict}");
            if digits <= 40 {
                msg.push_str(&format!(" (u_{n} = {value})"));
            }
            msg.push('\n');
            emit(&cli.out, &msg)?;
            if has {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Verify { p, q, n_cap } => {
            if let Err(code) = pair_or_exit(*p, *q) {
                return Ok(code);
            }
            let options = VerifyOptions {
                n_cap: *n_cap,
                policy,
            };
            let rep = verifier::verify_pair(*p, *q, &options)?;
            let content = match cli.format {
                Format::Json => {
                    let dto = report::report_dto(&rep, ts);
                    serde_json::to_string_pretty(&dto)? + "\n"
                }
                Format::Csv => report::report_csv(&rep),
                Format::Text => report::report_text(&rep),
            };
            emit(&cli.out, &content)?;
            match rep.conclusion {
                Conclusion::AllPrimitiveAboveThirty => ExitCode::SUCCESS,
                Conclusion::ExceptionFound(_) => ExitCode::from(1),
                Conclusion::Inconclusive(_) => ExitCode::from(3),
            }
        }
        Command::Table1 => {
            let rows = verifier::table1(&policy)?;
            let content = match cli.format {
                Format::Json => {
                    let dtos: Vec<report::ConvergentDto> = {
                        let rep_rows = &rows;
                        rep_rows
                            .iter()
                            .map(|r| report::ConvergentDto {
                                k: r.record.k,
                                n: r.record.n,
                                dreq_log_int: r.d_req_int.unwrap_or(i64::MIN),
                                dact_log_1dp: r
                                    .d_act_tenths
                                    .map(|t| t as f64 / 10.0)
                                    .unwrap_or(f64::NAN),
                                margin_ok: r.record.verdict == realcf::ConvergentVerdict::Refuted,
                            })
                            .collect()
                    };
                    serde_json::to_string_pretty(&dtos)? + "\n"
                }
                Format::Csv => report::convergent_csv(&rows),
                Format::Text => {
                    let mut s = format!(
                        "{:>11} {:>12} {:>13} {:>9}\n",
                        "k", "n", "log|d_req|", "log|d_act|"
                    );
                    for r in &rows {
                        s.push_str(&format!(
                            "{:>11} {:>12} {:>13} {:>9}\n",
                            r.record.k,
                            r.record.n,
                            r.d_req_int
                                .map(|v| v.to_string())
                                .unwrap_or_else(|| "?".into()),
                            r.d_act_tenths
                                .map(report::fmt_tenths)
                                .unwrap_or_else(|| "?".into()),
                        ));
                    }
                    s
                }
            };
            emit(&cli.out, &content)?;
            ExitCode::SUCCESS
        }
        Command::Table2 { q_max } => {
            let rows = verifier::table2(*q_max, &policy)?;
            let grouped = report::group_nq(&rows);
            let content = match cli.format {
                Format::Json => serde_json::to_string_pretty(&grouped)? + "\n",
                Format::Csv => {
                    let mut s = String::from("q_lo,q_hi,n_q\n");
                    for g in &grouped {
                        s.push_str(&format!("{},{},{}\n", g.q_lo, g.q_hi, g.n_q));
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!("{:>9} {:>6}\n", "q", "n_q");
                    for g in &grouped {
                        let label = if g.q_lo == g.q_hi {
                            g.q_lo.to_string()
                        } else {
                            format!("{}..{}", g.q_lo, g.q_hi)
                        };
                        s.push_str(&format!("{label:>9} {:>6}\n", g.n_q));
                    }
                    s
                }
            };
            emit(&cli.out, &content)?;
            ExitCode::SUCCESS
        }
        Command::Scan { q_lo, q_hi, n_cap } => {
            if *q_lo < 2 || q_lo > q_hi {
                eprintln!("scan requires 2 <= q-lo <= q-hi");
                return Ok(ExitCode::from(2));
            }
            let options = VerifyOptions {
                n_cap: *n_cap,
                policy,
            };
            let reports = verifier::scan(*q_lo, *q_hi, &options);
            let all_good = reports
                .iter()
                .all(|r| r.conclusion == Conclusion::AllPrimitiveAboveThirty);
            let content = match cli.format {
                Format::Json => {
                    let dtos: Vec<report::ReportDto> =
                        reports.iter().map(|r| report::report_dto(r, ts)).collect();
                    serde_json::to_string_pretty(&dtos)? + "\n"
                }
                Format::Csv => {
                    let mut s = String::from("p,q,conclusion\n");
                    for r in &reports {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            r.pair.p,
                            r.pair.q,
                            report::conclusion_string(&r.conclusion)
                        ));
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for r in &reports {
                        s.push_str(&format!(
                            "({:>5}, {:>5})  {}\n",
                            r.pair.p,
                            r.pair.q,
                            report::conclusion_string(&r.conclusion)
                        ));
                    }
                    s.push_str(&format!("pairs: {}\n", reports.len()));
                    s
                }
            };
            emit(&cli.out, &content)?;
            if all_good {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Command::Convergents { p, q, n_cap } => {
            if let Err(code) = pair_or_exit(*p, *q) {
                return Ok(code);
            }
            let src = |prec: u32| realcf::theta(*p, *q, prec);
            let recs = realcf::convergents(&src, *n_cap, &policy)?;
            let content = match cli.format {
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct Row {
                        k: u64,
                        n: u64,
                        partial_quotients: Vec<u64>,
                    }
                    let rows: Vec<Row> = recs
                        .iter()
                        .map(|r| Row {
                            k: r.k,
                            n: r.n,
                            partial_quotients: r.partial_quotients_prefix.clone(),
                        })
                        .collect();
                    serde_json::to_string_pretty(&rows)? + "\n"
                }
                Format::Csv => {
                    let mut s = String::from("k,n\n");
                    for r in &recs {
                        s.push_str(&format!("{},{}\n", r.k, r.n));
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for r in &recs {
                        s.push_str(&format!("{:>11} / {:<12}\n", r.k, r.n));
                    }
                    s
                }
            };
            emit(&cli.out, &content)?;
            ExitCode::SUCCESS
        }
        Command::GnCache { n_max, verify } => {
            let Some(dir) = &cache_dir else {
                eprintln!("gn-cache needs --cache-dir or PRIMDIV_CACHE_DIR");
                return Ok(ExitCode::from(2));
            };
            if *verify {
                let (ok, bad) = cache::load_dir(dir);
                println!("cache: {ok} valid, {bad} rejected");
                if bad > 0 {
                    return Ok(ExitCode::from(1));
                }
            } else {
                for n in 1..=*n_max {
                    cache::export(dir, n)?;
                }
                println!("cache: wrote {n_max} file(s) to {}", dir.display());
            }
            ExitCode::SUCCESS
        }
    };
    Ok(code)
}

fn rayon_pool(jobs: usize) {
    // a global pool can only be set once; later calls keep the first size
    let _ = primdiv::verifier::configure_thread_pool(jobs);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
