mod args;
mod commands;
mod defaults;
mod error;
mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::Cli;
use error::CliError;
use manifest::Manifest;

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdeconv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let root = Cli::command();
    let matches = match root.clone().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprint!("{e}");
            }
            return Err(CliError::Usage(e.render().to_string().trim_end().to_string()));
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;

    if let Some(path) = &cli.manifest {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut replay = Manifest::parse(&text)?.to_argv(&root)?;
        if let Some(t) = cli.threads {
            replay.push("--threads".into());
            replay.push(t.to_string().into());
        }
        return run(replay);
    }

    let Some(command) = cli.command else {
        return Err(CliError::Usage("no subcommand given (try --help)".into()));
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second call (manifest replay in the same process) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let (name, sub) = matches.subcommand().expect("subcommand present");
    let mut manifest = Manifest::from_matches(&root, name, sub);
    manifest.args.retain(|(k, _)| k != "threads");
    manifest
        .resolved
        .push(("threads".into(), rayon::current_num_threads().to_string()));
    commands::dispatch(command, &mut manifest)
}
