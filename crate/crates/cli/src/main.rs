use std::io::{stderr, stdout};
use std::process::exit;

fn main() {
    let status = movidx_cli::run_cli(std::env::args_os(), &mut stdout().lock(), &mut stderr().lock());
    exit(status.code());
}
