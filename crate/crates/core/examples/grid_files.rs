// The command-line workflow end to end: dump a synthetic gradient as grid
// files, reconstruct it with two subcommands and read the results back.

use gradsurf::cli::{main_with_args, read_grid};

pub fn run_example() -> gradsurf::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let code = main_with_args([
        "gradsurf",
        "simulate",
        "--truth",
        "quadratic",
        "--rows",
        "24",
        "--cols",
        "30",
        "--levels",
        "0",
        "--trials",
        "1",
        "--methods",
        "gls",
        "--dump",
        &path(""),
        "--out",
        &path("metrics.csv"),
    ]);
    assert_eq!(code, 0);

    for (cmd, out) in [("gls", "gls.g2s"), ("tikhonov", "tik.g2s")] {
        let mut args = vec!["gradsurf", cmd];
        if cmd == "tikhonov" {
            args.extend(["--lambda", "0.5", "--degree", "1"]);
        }
        let (zx, zy, out) = (path("zx.g2s"), path("zy.g2s"), path(out));
        args.extend([zx.as_str(), zy.as_str(), "--out", out.as_str()]);
        assert_eq!(main_with_args(args), 0);
        let grid = read_grid(std::path::Path::new(&out), (1.0, 1.0))?;
        println!(
            "{cmd}: {}×{} surface, hx={:.4}",
            grid.values.nrows(),
            grid.values.ncols(),
            grid.hx
        );
    }
    print!("{}", std::fs::read_to_string(path("metrics.csv"))?);
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
