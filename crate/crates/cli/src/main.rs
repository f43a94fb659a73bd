use clap::Parser;
use floquet_junction_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (manifest, code) = run(cli.command, &cli.options);
    if let Some(err) = &manifest.error {
        eprintln!("error: {err}");
    } else {
        for file in &manifest.outputs {
            println!("{}  {}", file.sha256, cli.options.out.join(&file.name).display());
        }
    }
    std::process::exit(code);
}
