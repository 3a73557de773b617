//! The `umbrella` command-line tool.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use umbrella_cli::error::CliError;
use umbrella_cli::experiment;
use umbrella_cli::plan::{parse_sizes, ExperimentPlan};
use umbrella_cli::registry::builtin_registry;
use umbrella_cli::report::{self, MeasurementKind, ReportMeta};
use umbrella_core::model::normalize_device_id;
use umbrella_core::path::HostPath;
use umbrella_core::{Driver, DriverConfig, FlowHandle, FlowRule, MacAddr};
use umbrella_mock::InstallMode;

#[derive(Parser)]
#[command(
    name = "umbrella",
    version,
    about = "Program SDN controllers through one driver-neutral interface"
)]
struct Cli {
    #[command(flatten)]
    connection: ConnectionArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand that talks to a controller. Values
/// layer as: built-in defaults, then --config file, then UMBRELLA_*
/// environment variables, then these flags.
#[derive(Args)]
struct ConnectionArgs {
    /// Driver configuration file (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Driver name (mock, onos, odl).
    #[arg(long, global = true)]
    driver: Option<String>,
    /// Controller endpoint URL.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Controller login user.
    #[arg(long, global = true)]
    user: Option<String>,
    /// Controller login password.
    #[arg(long, global = true)]
    pass: Option<String>,
    /// Request timeout in milliseconds.
    #[arg(long, global = true, value_name = "MS")]
    timeout_ms: Option<u64>,
    /// Extra driver setting, KEY=VALUE (repeatable).
    #[arg(long = "extra", global = true, value_name = "KEY=VALUE")]
    extras: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the controller's topology.
    Topology {
        #[command(subcommand)]
        action: TopologyAction,
    },
    /// List, install, or remove flow rules.
    Flows {
        #[command(subcommand)]
        action: FlowsAction,
    },
    /// Compute host-to-host paths.
    Path {
        #[command(subcommand)]
        action: PathAction,
    },
    /// Benchmark flow-rule setup time.
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
}

#[derive(Subcommand)]
enum TopologyAction {
    /// Print devices, links, and hosts.
    Show {
        /// Emit the snapshot as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum FlowsAction {
    /// List installed rules.
    List {
        /// Restrict to one device.
        #[arg(long)]
        device: Option<String>,
    },
    /// Install rules from a JSON file (an array of rules).
    Install {
        /// File holding the rules.
        #[arg(long)]
        file: PathBuf,
    },
    /// Remove one installed rule.
    Remove {
        /// Device the rule lives on.
        #[arg(long)]
        device: String,
        /// Driver-assigned flow id, as printed by `flows list`.
        #[arg(long)]
        id: String,
    },
}

#[derive(Subcommand)]
enum PathAction {
    /// Compute the shortest path between two hosts.
    Compute {
        /// Source host MAC.
        #[arg(long)]
        src_mac: String,
        /// Destination host MAC.
        #[arg(long)]
        dst_mac: String,
        /// Path algorithm name (default: bfs).
        #[arg(long)]
        algorithm: Option<String>,
        /// Emit the path as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum BenchAction {
    /// Run the setup-time experiment.
    Run(Box<BenchRunArgs>),
}

#[derive(Args)]
struct BenchRunArgs {
    /// Topology sizes: a range like 10..100:10 or a comma list.
    #[arg(long)]
    sizes: Option<String>,
    /// Repetitions per size.
    #[arg(long)]
    reps: Option<u32>,
    /// Probe rate in packets per second.
    #[arg(long)]
    rate_pps: Option<u32>,
    /// Delay between train start and first install, in milliseconds.
    #[arg(long, value_name = "MS")]
    pre_delay_ms: Option<u64>,
    /// Train duration in milliseconds.
    #[arg(long, value_name = "MS")]
    duration_ms: Option<u64>,
    /// Install mode: seq or par.
    #[arg(long)]
    install_mode: Option<String>,
    /// Simulated per-rule install latency in milliseconds (mock only).
    #[arg(long, value_name = "MS")]
    per_rule_ms: Option<f64>,
    /// Simulated per-call latency in milliseconds (mock only).
    #[arg(long, value_name = "MS")]
    base_rpc_ms: Option<f64>,
    /// Maximum concurrent installs in parallel mode (live only).
    #[arg(long)]
    fanout: Option<usize>,
    /// Path algorithm name.
    #[arg(long)]
    algorithm: Option<String>,
    /// Source host MAC (default: lowest MAC in the topology).
    #[arg(long, requires = "dst_mac")]
    src_mac: Option<String>,
    /// Destination host MAC (default: highest MAC in the topology).
    #[arg(long, requires = "src_mac")]
    dst_mac: Option<String>,
    /// Write per-repetition results to this CSV file (plus a .dat table
    /// next to it for gnuplot).
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

fn main() {
    // Rust ignores SIGPIPE by default, turning a closed pipe (`umbrella ... |
    // head`) into a panic on the next print. Restore the usual line-tool
    // behavior: terminate quietly when the reader goes away.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("umbrella: {e}");
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = build_config(&cli.connection)?;
    match &cli.command {
        Command::Topology { action: TopologyAction::Show { json } } => {
            topology_show(&config, *json)
        }
        Command::Flows { action } => match action {
            FlowsAction::List { device } => flows_list(&config, device.as_deref()),
            FlowsAction::Install { file } => flows_install(&config, file),
            FlowsAction::Remove { device, id } => flows_remove(&config, device, id),
        },
        Command::Path { action: PathAction::Compute { src_mac, dst_mac, algorithm, json } } => {
            path_compute(&config, src_mac, dst_mac, algorithm.as_deref(), *json)
        }
        Command::Bench { action: BenchAction::Run(args) } => bench_run(&config, args),
    }
}

/// Layers the connection settings: defaults, file, environment, flags.
fn build_config(args: &ConnectionArgs) -> Result<DriverConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => DriverConfig::from_toml_file(path)?,
        None => DriverConfig::default(),
    };
    config.apply_env();
    if let Some(name) = &args.driver {
        config.name = name.clone();
    }
    if let Some(endpoint) = &args.endpoint {
        config.endpoint = endpoint.clone();
    }
    if let Some(user) = &args.user {
        config.username = user.clone();
    }
    if let Some(pass) = &args.pass {
        config.password = pass.clone();
    }
    if let Some(timeout) = args.timeout_ms {
        config.request_timeout_ms = timeout;
    }
    for pair in &args.extras {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("bad --extra {pair:?}, want KEY=VALUE")))?;
        config.extras.insert(key.to_string(), value.to_string());
    }
    Ok(config)
}

fn connect(config: &DriverConfig) -> Result<Box<dyn Driver>, CliError> {
    builtin_registry().create(config).map_err(|e| CliError::Invalid(e.to_string()))
}

fn parse_mac(text: &str) -> Result<MacAddr, CliError> {
    MacAddr::from_str(text).map_err(|e| CliError::Invalid(format!("bad MAC {text:?}: {e}")))
}

fn topology_show(config: &DriverConfig, json: bool) -> Result<(), CliError> {
    let driver = connect(config)?;
    let snapshot = driver.get_topology()?;
    if json {
        let text = serde_json::to_string_pretty(&snapshot)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    println!("devices: {}", snapshot.device_count());
    for (device, ports) in snapshot.devices() {
        let ports: Vec<String> = ports.iter().map(u32::to_string).collect();
        println!("  {device}  ports [{}]", ports.join(", "));
    }
    println!("links: {}", snapshot.links().len());
    for link in snapshot.links() {
        println!("  {} -> {}", link.src, link.dst);
    }
    println!("hosts: {}", snapshot.host_count());
    for host in snapshot.hosts() {
        match host.ip {
            Some(ip) => println!("  {}  {}  at {}", host.mac, ip, host.attachment),
            None => println!("  {}  at {}", host.mac, host.attachment),
        }
    }
    Ok(())
}

fn describe_rule(handle: &FlowHandle, rule: &FlowRule) -> String {
    format!(
        "{}  id={}  table={}  priority={}  match[{}]  actions={:?}",
        rule.device(),
        handle.driver_flow_id,
        rule.table_id(),
        rule.priority(),
        rule.match_fields().canonical_key(),
        rule.actions()
    )
}

fn flows_list(config: &DriverConfig, device: Option<&str>) -> Result<(), CliError> {
    let driver = connect(config)?;
    let device = device
        .map(|text| normalize_device_id(text).map_err(|e| CliError::Invalid(e.to_string())))
        .transpose()?;
    let flows = driver.list_flows(device)?;
    for (handle, rule) in &flows {
        println!("{}", describe_rule(handle, rule));
    }
    println!("{} rule(s)", flows.len());
    Ok(())
}

fn flows_install(config: &DriverConfig, file: &PathBuf) -> Result<(), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", file.display())))?;
    let rules: Vec<FlowRule> = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("bad rule file {}: {e}", file.display())))?;
    if rules.is_empty() {
        return Err(CliError::Invalid(format!("{} holds no rules", file.display())));
    }
    let driver = connect(config)?;
    for rule in &rules {
        let handle = driver.install_flow(rule)?;
        println!("installed {}", describe_rule(&handle, rule));
    }
    println!("{} rule(s) installed", rules.len());
    Ok(())
}

fn flows_remove(config: &DriverConfig, device: &str, id: &str) -> Result<(), CliError> {
    let device = normalize_device_id(device).map_err(|e| CliError::Invalid(e.to_string()))?;
    let driver = connect(config)?;
    let handle = FlowHandle::new(device, id);
    driver.remove_flow(&handle)?;
    println!("removed {handle}");
    Ok(())
}

fn path_as_json(path: &HostPath) -> serde_json::Value {
    serde_json::json!({
        "src": path.src().mac.to_string(),
        "dst": path.dst().mac.to_string(),
        "hops": path.hops().iter().map(|hop| {
            serde_json::json!({
                "device": hop.device.to_string(),
                "in_port": hop.in_port.port_no,
                "out_port": hop.out_port.port_no,
            })
        }).collect::<Vec<_>>(),
    })
}

fn path_compute(
    config: &DriverConfig,
    src_mac: &str,
    dst_mac: &str,
    algorithm: Option<&str>,
    json: bool,
) -> Result<(), CliError> {
    use umbrella_core::path::{build_graph, shortest_path};

    let src_mac = parse_mac(src_mac)?;
    let dst_mac = parse_mac(dst_mac)?;
    let driver = connect(config)?;
    let snapshot = driver.get_topology()?;
    let src = snapshot
        .host(src_mac)
        .ok_or_else(|| CliError::Invalid(format!("no host with MAC {src_mac}")))?
        .clone();
    let dst = snapshot
        .host(dst_mac)
        .ok_or_else(|| CliError::Invalid(format!("no host with MAC {dst_mac}")))?
        .clone();
    let graph = build_graph(&snapshot);
    let path = shortest_path(&graph, &src, &dst, algorithm)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&path_as_json(&path)).expect("static shape"));
        return Ok(());
    }
    println!("{} -> {}  ({} hops)", src.mac, dst.mac, path.hops().len());
    for hop in path.hops() {
        println!("  {}  in {}  out {}", hop.device, hop.in_port.port_no, hop.out_port.port_no);
    }
    Ok(())
}

/// A millisecond setting for the simulated controller: the flag wins,
/// then the driver config's extras, then zero.
fn ms_setting(flag: Option<f64>, config: &DriverConfig, key: &str) -> Result<f64, CliError> {
    if let Some(value) = flag {
        return Ok(value);
    }
    match config.extras.get(key) {
        None => Ok(0.0),
        Some(text) => text
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Invalid(format!("bad {key} value {text:?}"))),
    }
}

fn bench_plan(args: &BenchRunArgs, config: &DriverConfig) -> Result<ExperimentPlan, CliError> {
    let mut plan = ExperimentPlan::default();
    if let Some(text) = &args.sizes {
        plan.sizes = parse_sizes(text)?;
    }
    if let Some(reps) = args.reps {
        plan.repetitions = reps;
    }
    if let Some(rate) = args.rate_pps {
        plan.rate_pps = rate;
    }
    if let Some(delay) = args.pre_delay_ms {
        plan.pre_install_delay_ms = delay;
    }
    if let Some(duration) = args.duration_ms {
        plan.train_duration_ms = duration;
    }
    let mode_text = args.install_mode.as_ref().or_else(|| config.extras.get("install_mode"));
    if let Some(mode) = mode_text {
        plan.install_mode =
            InstallMode::from_str(mode).map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    plan.algorithm = args.algorithm.clone();
    plan.validate()?;
    Ok(plan)
}

fn bench_run(config: &DriverConfig, args: &BenchRunArgs) -> Result<(), CliError> {
    let plan = bench_plan(args, config)?;
    let endpoints = match (&args.src_mac, &args.dst_mac) {
        (Some(src), Some(dst)) => Some((parse_mac(src)?, parse_mac(dst)?)),
        _ => None,
    };

    let (results, measurement) = if config.name == "mock" {
        let per_rule_ms = ms_setting(args.per_rule_ms, config, "per_rule_ms")?;
        let base_rpc_ms = ms_setting(args.base_rpc_ms, config, "base_rpc_ms")?;
        let install_mode = plan.install_mode;
        let factory = move |n: u32| {
            let latency = umbrella_mock::LatencyModel::new(per_rule_ms, install_mode, base_rpc_ms)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            umbrella_mock::MockController::linear(n, latency).map_err(CliError::from)
        };
        (experiment::run_simulated(&plan, endpoints, &factory)?, MeasurementKind::LossBased)
    } else {
        let driver = connect(config)?;
        (
            experiment::run_live(driver.as_ref(), &plan, endpoints, args.fanout)?,
            MeasurementKind::AckBased,
        )
    };

    for result in &results {
        println!(
            "size {:>4}: mean {:.3} ms  stddev {:.3} ms  ({} reps)",
            result.size,
            result.mean_setup_ms,
            result.stddev_setup_ms,
            result.per_rep.len()
        );
    }

    if let Some(csv_path) = &args.csv {
        let meta = ReportMeta::for_plan(&plan, measurement);
        report::write_csv(csv_path, &results, &meta)?;
        println!("wrote {}", csv_path.display());
        let dat_path = csv_path.with_extension("dat");
        report::write_gnuplot(&dat_path, &results)?;
        println!("wrote {}", dat_path.display());
    }
    Ok(())
}
