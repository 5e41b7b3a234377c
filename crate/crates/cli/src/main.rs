use std::io::Write;

use clap::Parser;

use dualperiods_cli::{run, summary, Cli};

fn main() {
    let cli = Cli::parse();
    let report = run(&cli.command);
    let text = if cli.json {
        serde_json::to_string_pretty(&report).expect("serializable") + "\n"
    } else {
        summary(&report)
    };
    // write errors (a closed pipe) are ignored
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    std::process::exit(report.exit_code());
}
