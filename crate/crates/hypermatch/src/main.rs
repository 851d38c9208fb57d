fn main() {
    // Any panic is a broken internal contract; report and exit distinctly
    // from input errors so scripts can tell the cases apart.
    std::panic::set_hook(Box::new(|info| {
        eprintln!("internal contract violation: {info}");
        std::process::exit(hypermatch::cli::EXIT_INTERNAL);
    }));
    std::process::exit(hypermatch::cli::run());
}
