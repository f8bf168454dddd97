use clap::Parser;

fn main() {
    let cli = citerec::cli::Cli::parse();
    match citerec::cli::execute(&cli) {
        Ok(summary) => eprintln!("{summary}"),
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            std::process::exit(1);
        }
    }
}
