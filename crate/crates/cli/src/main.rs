use std::io::IsTerminal;

fn main() {
    let color = std::env::var(narratables_cli::COLOR_ENV).ok();
    let is_tty = std::io::stdout().is_terminal();
    let code = narratables_cli::run(
        std::env::args_os(),
        color.as_deref(),
        is_tty,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
