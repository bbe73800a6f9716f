fn main() {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let code = ocat::cli::with_big_stack(move || {
        let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
        ocat::cli::run(args, &mut out, &mut err)
    });
    std::process::exit(code);
}
