//! Flat `key=value` run manifests.
//!
//! `command=<name>` names the subcommand, `arg.<flag>=<value>` records every
//! resolved flag (defaults included), `resolved.<key>=<value>` records values
//! derived during the run. Replaying uses only the `command` and `arg.` lines.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::Path;

use clap::{ArgAction, ArgMatches, Command};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<(String, String)>,
    pub resolved: Vec<(String, String)>,
}

impl Manifest {
    /// Captures every flag of a parsed subcommand, by long name.
    pub fn from_matches(root: &Command, name: &str, sub: &ArgMatches) -> Manifest {
        let cmd = root.find_subcommand(name).expect("parsed subcommand exists");
        let mut args = Vec::new();
        for arg in cmd.get_arguments() {
            let id = arg.get_id().as_str();
            let Some(long) = arg.get_long() else { continue };
            if matches!(long, "help" | "version") || sub.value_source(id).is_none() {
                continue;
            }
            let value = match arg.get_action() {
                ArgAction::SetTrue | ArgAction::SetFalse => sub.get_flag(id).to_string(),
                _ => match sub.get_raw(id) {
                    Some(vals) => vals
                        .map(|v| v.to_string_lossy().into_owned())
                        .collect::<Vec<_>>()
                        .join(","),
                    None => continue,
                },
            };
            args.push((long.to_string(), value));
        }
        Manifest {
            command: name.to_string(),
            args,
            resolved: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "version={}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "command={}", self.command).unwrap();
        for (k, v) in &self.args {
            writeln!(s, "arg.{k}={v}").unwrap();
        }
        for (k, v) in &self.resolved {
            writeln!(s, "resolved.{k}={v}").unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Manifest, CliError> {
        let mut command = None;
        let mut args = Vec::new();
        let mut resolved = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("manifest line {}: expected key=value", i + 1)))?;
            if k == "command" {
                command = Some(v.to_string());
            } else if let Some(flag) = k.strip_prefix("arg.") {
                args.push((flag.to_string(), v.to_string()));
            } else if let Some(key) = k.strip_prefix("resolved.") {
                resolved.push((key.to_string(), v.to_string()));
            }
        }
        let command = command.ok_or_else(|| CliError::Usage("manifest has no command= line".into()))?;
        Ok(Manifest { command, args, resolved })
    }

    /// Command line that reproduces the recorded run.
    pub fn to_argv(&self, root: &Command) -> Result<Vec<OsString>, CliError> {
        let cmd = root
            .find_subcommand(&self.command)
            .ok_or_else(|| CliError::Usage(format!("manifest names unknown command '{}'", self.command)))?;
        let mut argv: Vec<OsString> = vec![root.get_name().into(), self.command.clone().into()];
        for (flag, value) in &self.args {
            let arg = cmd
                .get_arguments()
                .find(|a| a.get_long() == Some(flag))
                .ok_or_else(|| CliError::Usage(format!("manifest flag --{flag} is not valid for {}", self.command)))?;
            match arg.get_action() {
                ArgAction::SetTrue => {
                    if value == "true" {
                        argv.push(format!("--{flag}").into());
                    }
                }
                _ => {
                    argv.push(format!("--{flag}").into());
                    argv.push(value.into());
                }
            }
        }
        Ok(argv)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render())
            .map_err(|e| CliError::Data(format!("cannot write manifest {}: {e}", path.display())))
    }
}
