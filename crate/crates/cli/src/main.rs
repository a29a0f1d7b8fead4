use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};
use gravac_cli::config::{parse_raw, resolve, Raw, KEYS};
use gravac_cli::{run, CliError};

fn command() -> Command {
    let mut cmd = Command::new("gravac")
        .about("Vacuum-induced decoherence scenarios; writes CSV")
        .arg(Arg::new("config").long("config").value_name("FILE").help("JSON or key=value configuration file"));
    for k in KEYS {
        let flag = k.name.replace('_', "-");
        let mut arg = Arg::new(k.name).long(flag.clone()).value_name("VALUE").help(k.help).action(ArgAction::Set);
        if flag != k.name {
            arg = arg.alias(k.name);
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

fn main_inner() -> Result<(), CliError> {
    let matches = command().get_matches();
    let mut raw = match matches.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("config: cannot read {path}: {e}")))?;
            parse_raw(&text)?
        }
        None => Default::default(),
    };
    for k in KEYS {
        if let Some(v) = matches.get_one::<String>(k.name) {
            raw.insert(k.name.to_string(), Raw::Text(v.clone()));
        }
    }
    let cfg = resolve(raw)?;
    let report = run(&cfg)?;
    match cfg.str("output") {
        "-" => print!("{}", report.csv),
        path => std::fs::write(path, &report.csv).map_err(|e| CliError::Io(format!("{path}: {e}")))?,
    }
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
