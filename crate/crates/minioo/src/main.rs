use std::path::Path;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = minioo::cli::run_with(
        &args,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
        Path::new("."),
    );
    std::process::exit(code);
}
