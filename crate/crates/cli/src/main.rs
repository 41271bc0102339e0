const USAGE: &str = "\
usage: fpt COMMAND [key=value ...]

commands: eval-psi dagger phase-shift eigenfunction renewal survival density validate mc

process:  family=NAME [params]            e.g. family=stable alpha=1.5
          file=PATH [index=K]             K-th descriptor of a file
grids:    t= x= lambda= xi=               VALUE or START..STOPxCOUNT[log]
options:  n= tol= t0= seed= paths= step= out=FILE.csv plot=FILE.gp

exit codes: 0 ok, 2 parse error, 3 condition failure, 4 tolerance failure
";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || matches!(args[0].as_str(), "-h" | "--help" | "help") {
        print!("{USAGE}");
        std::process::exit(if args.is_empty() { 2 } else { 0 });
    }
    std::process::exit(fpt_cli::main_with_args(&args));
}
