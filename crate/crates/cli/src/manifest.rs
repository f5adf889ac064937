use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::commands::{CommandError, Report};
use crate::{Cli, Command, F2Command, LedrappierCommand, MosaicCommand, RankOneCommand, RecurrenceCommand};

/// Record of one invocation. Only `wall_time_ms` varies between identical runs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub versions: Value,
    pub outputs: Vec<PathBuf>,
    pub status: &'static str,
    pub error: Option<String>,
    pub wall_time_ms: u128,
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Tower(_) => "tower",
        Command::Involutions(_) => "involutions",
        Command::Rankone(RankOneCommand::Correlate(_)) => "rankone correlate",
        Command::Rankone(RankOneCommand::Design(_)) => "rankone design",
        Command::Recurrence(RecurrenceCommand::Average { .. }) => "recurrence average",
        Command::Recurrence(RecurrenceCommand::Terms { .. }) => "recurrence terms",
        Command::Recurrence(RecurrenceCommand::Roth { .. }) => "recurrence roth",
        Command::Ledrappier(LedrappierCommand::Sample { .. }) => "ledrappier sample",
        Command::Ledrappier(LedrappierCommand::Thread { .. }) => "ledrappier thread",
        Command::Mosaic(MosaicCommand::Generate { .. }) => "mosaic generate",
        Command::Mosaic(MosaicCommand::Count { .. }) => "mosaic count",
        Command::Mosaic(MosaicCommand::Entropy { .. }) => "mosaic entropy",
        Command::F2(F2Command::Search { .. }) => "f2 search",
        Command::F2(F2Command::Baseline { .. }) => "f2 baseline",
    }
}

fn command_seed(command: &Command) -> Option<u64> {
    match command {
        Command::Tower(a) => a.seed,
        Command::Involutions(a) => a.seed,
        Command::Rankone(_) => None,
        Command::Recurrence(
            RecurrenceCommand::Average { system, .. }
            | RecurrenceCommand::Terms { system, .. }
            | RecurrenceCommand::Roth { system, .. },
        ) => Some(system.seed),
        Command::Ledrappier(LedrappierCommand::Sample { seed, .. } | LedrappierCommand::Thread { seed, .. }) => {
            Some(*seed)
        }
        Command::Mosaic(MosaicCommand::Generate { seed, .. }) => Some(*seed),
        Command::Mosaic(_) => None,
        Command::F2(F2Command::Search { seed, .. }) => Some(*seed),
        Command::F2(F2Command::Baseline { .. }) => None,
    }
}

impl Manifest {
    pub fn new(cli: &Cli, elapsed: Duration) -> Self {
        Manifest {
            subcommand: subcommand_name(&cli.command).to_string(),
            parameters: serde_json::to_value(&cli.command).unwrap_or(Value::Null),
            seed: command_seed(&cli.command),
            versions: serde_json::json!({ "ergolab": env!("CARGO_PKG_VERSION") }),
            outputs: cli.out.iter().cloned().collect(),
            status: "ok",
            error: None,
            wall_time_ms: elapsed.as_millis(),
        }
    }

    pub fn record(&mut self, report: &Report) {
        self.outputs.extend(report.extra_outputs.iter().cloned());
    }

    pub fn fail(&mut self, e: &CommandError) {
        self.status = "error";
        self.error = Some(e.to_string());
    }

    pub fn write(&self, cli: &Cli) -> io::Result<()> {
        let path = cli.manifest.clone().or_else(|| {
            cli.out.as_ref().map(|o| {
                let mut p = o.clone().into_os_string();
                p.push(".manifest.json");
                PathBuf::from(p)
            })
        });
        let mut out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stderr().lock()),
        };
        serde_json::to_writer(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()
    }
}
