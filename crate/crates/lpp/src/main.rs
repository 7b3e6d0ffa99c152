use std::process::exit;

fn main() {
    exit(tournament_lpp::cli::run(std::env::args_os()));
}
