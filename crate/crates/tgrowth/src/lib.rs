//! `tgrowth`: batch front end for the torus_growth library.
//!
//! Data goes to `out`, diagnostics to `err`. Exit codes: 0 success, 1 usage or input error,
//! 2 certification mismatch.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use torus_growth::group_core::{bfs_ball_with, Exec, GroupParams};
use torus_growth::laurent::{evaluate_rep, n_length, LaurentPoly};
use torus_growth::reduction::{element_of, reduce_full};
use torus_growth::series::growth::{assemble_growth_series, SeriesMode};
use torus_growth::series::poly::expand_coeffs;
use torus_growth::successor::{
    classify, enumerate_reduced, expected_effect, predecessor, succ_effect, successor, write_enumeration_csv,
};
use torus_growth::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "tgrowth", version, about = "Word metric and growth series of Z^2 x|_T Z, T = [[0,-1],[1,2k+1]]")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sphere and ball sizes by breadth-first search.
    Ball {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Word length of the element (P(T) b, t^n), from reduction and from BFS.
    Dist {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        poly: LaurentPoly,
        /// BFS radius used to cross-check the reduced length.
        #[arg(long, default_value_t = 8)]
        radius: u32,
    },
    /// Reduce a Laurent polynomial to its n-reduced form.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        poly: LaurentPoly,
        #[arg(long)]
        trace: bool,
    },
    /// Type and class of an n-reduced polynomial.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        poly: LaurentPoly,
    },
    /// Successor of an n-reduced polynomial, with its length change and group step.
    Succ {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        poly: LaurentPoly,
    },
    /// All n-reduced polynomials up to an n-length.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        max_length: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// The rational growth series, certified against BFS through --verify-to.
    Series {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        verify_to: u32,
        /// Emit the series without a BFS check.
        #[arg(long)]
        unchecked: bool,
        #[arg(long, value_enum, default_value_t = Mode::Sphere)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Series coefficients against BFS sphere sizes for every radius up to --radius.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// T has trace 2k+1; k >= 2.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    k: u32,
    /// Expand BFS frontiers on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn params(&self) -> Result<GroupParams, Error> {
        GroupParams::new(self.k)
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Ball,
    Sphere,
}

enum Failure {
    Usage(String),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Certification { .. } => Failure::Mismatch(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("output: {e}"))
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, S, O, E>(argv: I, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Mismatch(m)) => {
            let _ = writeln!(err, "certification failed: {m}");
            EXIT_MISMATCH
        }
    }
}

fn execute<O: Write, E: Write>(cmd: Command, out: &mut O, err: &mut E) -> Result<(), Failure> {
    match cmd {
        Command::Ball { common, radius, format } => {
            let ball = bfs_ball_with(&common.params()?, radius, usize::MAX, common.exec())?;
            match format {
                Format::Json => writeln!(out, "{}", ball.to_json())?,
                Format::Csv => write!(out, "{}", ball.to_csv())?,
            }
        }
        Command::Dist { common, n, poly, radius } => {
            let params = common.params()?;
            let g = element_of(&params, &poly, n);
            let red = reduce_full(&params, &poly, n)?;
            let reduced_length = n_length(&red.result, n).0;
            let ball = bfs_ball_with(&params, radius, usize::MAX, common.exec())?;
            let bfs = ball.distance(&g);
            let row = json!({
                "element": g.to_string(),
                "reduced": red.result,
                "reduced_length": reduced_length,
                "bfs_distance": bfs,
            });
            writeln!(out, "{row}")?;
            if bfs.is_none() {
                writeln!(err, "element lies outside the BFS ball of radius {radius}")?;
            }
        }
        Command::Reduce { common, n, poly, trace } => {
            let params = common.params()?;
            let red = reduce_full(&params, &poly, n)?;
            if trace {
                for step in &red.trace {
                    writeln!(out, "{step}")?;
                }
            }
            writeln!(out, "{}", red.result)?;
        }
        Command::Classify { common, n, poly } => {
            let c = classify(&poly, n, common.params()?.k())?;
            let row = json!({
                "poly": poly,
                "n": n,
                "type": c.ty.label(),
                "class": c.class.map(|t| t.label()),
                "length": n_length(&poly, n).0,
            });
            writeln!(out, "{row}")?;
        }
        Command::Succ { common, n, poly } => {
            let params = common.params()?;
            let c = classify(&poly, n, params.k())?;
            let next = successor(&params, &poly, n)?;
            let effect = succ_effect(&params, &poly, n)?;
            let back = predecessor(&params, &next, n)?;
            let x = evaluate_rep(&params, &next);
            let row = json!({
                "poly": poly,
                "class": c.to_string(),
                "successor": next,
                "x": [x[0].to_string(), x[1].to_string()],
                "length_delta": effect.length_delta,
                "step": effect.step.to_string(),
                "expected": expected_effect(c).map(|e| json!({"length_delta": e.length_delta, "step": e.step.to_string()})),
                "predecessor_roundtrip": back == poly,
            });
            writeln!(out, "{row}")?;
        }
        Command::Enumerate { common, n, max_length, format } => {
            let params = common.params()?;
            let rows = enumerate_reduced(params.k(), n, max_length);
            match format {
                Format::Csv => write_enumeration_csv(&params, &rows, &mut *out)?,
                Format::Json => {
                    let v = serde_json::to_string(&rows).map_err(|e| Failure::Usage(e.to_string()))?;
                    writeln!(out, "{v}")?;
                }
            }
        }
        Command::Series { common, verify_to, unchecked, mode, format } => {
            if verify_to == 0 && !unchecked {
                return Err(Failure::Usage("series needs --verify-to R (R >= 1) or --unchecked".into()));
            }
            let mode = match mode {
                Mode::Ball => SeriesMode::Ball,
                Mode::Sphere => SeriesMode::Sphere,
            };
            let s = assemble_growth_series(common.k, verify_to, mode, common.exec())?;
            match format {
                Format::Json => writeln!(out, "{}", s.to_json())?,
                Format::Csv => {
                    writeln!(out, "radius,coefficient")?;
                    for (r, c) in s.coefficients.iter().enumerate() {
                        writeln!(out, "{r},{c}")?;
                    }
                }
            }
        }
        Command::Verify { common, radius, format } => {
            let params = common.params()?;
            let s = assemble_growth_series(common.k, 0, SeriesMode::Sphere, common.exec())?;
            let coeffs = expand_coeffs(&s.series, radius as usize)?;
            let ball = bfs_ball_with(&params, radius, usize::MAX, common.exec())?;
            let mut failed = None;
            let mut rows = Vec::new();
            for (r, (c, b)) in coeffs.iter().zip(ball.sphere_sizes.iter().copied()).enumerate() {
                let ok = *c == b.into();
                if !ok && failed.is_none() {
                    failed = Some(r);
                }
                rows.push((r, c.to_string(), b, ok));
            }
            match format {
                Format::Csv => {
                    writeln!(out, "radius,series,bfs,match")?;
                    for (r, c, b, ok) in &rows {
                        writeln!(out, "{r},{c},{b},{ok}")?;
                    }
                }
                Format::Json => {
                    let v: Vec<_> =
                        rows.iter().map(|(r, c, b, ok)| json!({"radius": r, "series": c, "bfs": b, "match": ok})).collect();
                    writeln!(out, "{}", json!({"k": common.k, "radius": radius, "rows": v}))?;
                }
            }
            if let Some(r) = failed {
                return Err(Failure::Mismatch(format!("series and BFS differ at radius {r}")));
            }
        }
    }
    Ok(())
}
