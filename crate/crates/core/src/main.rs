use clap::Parser;

fn main() {
    let code = skorokhod::cli::run(skorokhod::cli::Cli::parse());
    std::process::exit(code);
}
