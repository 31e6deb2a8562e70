use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use toric_relu_cli::{run_job, CliError, Command, Format, Outcome};

/// Toric invariants of unbiased ReLU networks and piecewise linear functions.
#[derive(Debug, Parser)]
#[command(name = "toric-relu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job document; standard input when absent.
    #[arg(long, global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Report destination (a directory with `--batch`); standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run the command on every `.json` document in a directory.
    #[arg(long, global = true, value_name = "DIR", conflicts_with = "input")]
    batch: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn svg_target(command: &Command) -> Option<&str> {
    match command {
        Command::Fan { svg } | Command::Render { svg, .. } => svg.as_deref(),
        _ => None,
    }
}

fn extension(cli: &Cli) -> &'static str {
    match (&cli.command, cli.format) {
        (Command::Render { .. }, _) => "svg",
        (_, Format::Json) => "json",
        (_, Format::Text) => "txt",
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Eval { .. } => "eval",
        Command::Fan { .. } => "fan",
        Command::Divisor => "divisor",
        Command::Intersect => "intersect",
        Command::Classify => "classify",
        Command::Polytope { .. } => "polytope",
        Command::Newton => "newton",
        Command::Volume { .. } => "volume",
        Command::Reduce => "reduce",
        Command::Shift { .. } => "shift",
        Command::Realize { .. } => "realize",
        Command::Render { .. } => "render",
    }
}

fn single(cli: &Cli) -> Result<i32, CliError> {
    let text = match &cli.input {
        Some(p) => read(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
            s
        }
    };
    let Outcome { report, svg, exit_code } = run_job(&cli.command, cli.format, &text)?;
    let to_svg_file = svg_target(&cli.command).zip(svg);
    let render_only = matches!(cli.command, Command::Render { .. }) && to_svg_file.is_some();
    if let Some((path, picture)) = to_svg_file {
        write(Path::new(path), &picture)?;
    }
    if !render_only || cli.output.is_some() {
        match &cli.output {
            Some(p) => write(p, &report)?,
            None => print!("{report}"),
        }
    }
    Ok(exit_code)
}

/// Each document gets its own thread and its own output file
/// `<stem>.<command>.<ext>`; the worst exit status wins.
fn batch(cli: &Cli, dir: &Path) -> Result<i32, CliError> {
    let io_err = |source| CliError::Io { path: dir.display().to_string(), source };
    let mut inputs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    inputs.sort();
    let out_dir = cli.output.clone().unwrap_or_else(|| dir.to_path_buf());
    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io { path: out_dir.display().to_string(), source })?;
    let name = command_name(&cli.command);
    let ext = extension(cli);

    let codes: Vec<i32> = std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .iter()
            .map(|input| {
                let out_dir = &out_dir;
                scope.spawn(move || {
                    let stem = input.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    let result = read(input).and_then(|text| run_job(&cli.command, cli.format, &text)).and_then(|o| {
                        write(&out_dir.join(format!("{stem}.{name}.{ext}")), &o.report)?;
                        if let (Some(picture), Command::Fan { svg: Some(_) }) = (&o.svg, &cli.command) {
                            write(&out_dir.join(format!("{stem}.{name}.svg")), picture)?;
                        }
                        Ok(o.exit_code)
                    });
                    result.unwrap_or_else(|e| {
                        eprintln!("{}: {e}", input.display());
                        e.exit_code()
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or(1)).collect()
    });
    Ok(codes.into_iter().max().unwrap_or(0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.batch {
        Some(dir) => batch(&cli, dir),
        None => single(&cli),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
