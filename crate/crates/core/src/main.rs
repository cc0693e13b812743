use std::io::Write;

use sepcert::cli::{run, EXIT_INPUT};

fn main() {
    let res = run(std::env::args_os());
    let text = format!("{}\n", res.report.trim_end());
    // a closed pipe is not an error for a report writer
    let _ = if res.exit_code == EXIT_INPUT {
        std::io::stderr().write_all(text.as_bytes())
    } else {
        std::io::stdout().write_all(text.as_bytes())
    };
    std::process::exit(res.exit_code);
}
