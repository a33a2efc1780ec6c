use std::process::ExitCode;

use spherot::cli::Cli;
use spherot::report::format_number;

fn main() -> ExitCode {
    let cli = match Cli::parse_args(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = cli.into_config().and_then(spherot::run);
    match result {
        Ok(summary) => {
            for check in &summary.report.checks {
                let verdict = if check.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {} = {} (threshold {})", check.name, format_number(check.value), format_number(check.threshold));
            }
            println!("artifacts written to {}", summary.out_dir.display());
            ExitCode::from(summary.exit_status() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
