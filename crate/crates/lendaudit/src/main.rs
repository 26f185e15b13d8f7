use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lendaudit::completion::ReplayClient;
use lendaudit::config::Config;
use lendaudit::corpus::{run_corpus, CorpusOptions};
use lendaudit::formats::{self, load_events, load_mapping, load_permission_registry, load_policy, load_policy_dir, read_file};
use lendaudit::mapping_run::map_policy;
use lendaudit::report::{emit_report, now_rfc3339, render_summary_table, AuditReport, ReportFormat};
use lendaudit::{builtin, core};
use core::dynamic::{detect_exfiltration, generate_hook_plan};
use core::mapper::{diff_against_ground_truth, PolicyDocument, TextCompletion};
use core::mapping::MappingTable;
use core::permission::PermissionRegistry;
use core::pipeline::{audit_apk, read_manifest, PolicyLibrary};
use core::policy::Jurisdiction;

/// Audit Android lending apps against country and platform permission
/// prohibitions.
#[derive(Parser)]
#[command(name = "lendaudit", version)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Sources {
    /// Directory of policy files (built-in policies when omitted).
    #[arg(long)]
    policies: Option<PathBuf>,
    /// Permission-to-API mapping file (built-in seed table when omitted).
    #[arg(long)]
    mapping: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Audit one APK for one jurisdiction and print its report.
    Audit {
        apk: PathBuf,
        #[arg(long)]
        jurisdiction: Jurisdiction,
        #[command(flatten)]
        sources: Sources,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit every registry row with an APK and summarize per country.
    Corpus {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        apk_dir: PathBuf,
        #[command(flatten)]
        sources: Sources,
        /// Output directory for reports and summary.
        #[arg(long)]
        out: Option<PathBuf>,
        /// structured or tabular
        #[arg(long, default_value = "structured")]
        format: ReportFormat,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Map a policy document to permission rules with one or more models.
    MapPolicy {
        /// Plain-text policy document.
        doc: PathBuf,
        #[arg(long)]
        jurisdiction: Jurisdiction,
        /// Directory of recorded responses (`<jurisdiction>/<model>/response.txt`).
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Model ids; defaults to every recording, or the configured live model.
        #[arg(long, value_delimiter = ',')]
        models: Vec<String>,
        /// Permission registry file (built-in when omitted).
        #[arg(long)]
        permission_registry: Option<PathBuf>,
        /// Expert policy file to compare the draft against.
        #[arg(long)]
        expected: Option<PathBuf>,
        /// Write the draft policy file here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the request that would be sent and stop.
        #[arg(long)]
        print_request: bool,
    },
    /// Find source-to-sink transmissions in a runtime event log.
    Dynlog {
        events: PathBuf,
        /// APK whose manifest supplies the launcher activities.
        #[arg(long)]
        manifest_of: PathBuf,
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Emit the instrumentation hook plan for one APK.
    Hooks {
        apk: PathBuf,
        #[arg(long)]
        jurisdiction: Jurisdiction,
        #[command(flatten)]
        sources: Sources,
    },
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?).with_context(|| format!("{} is not UTF-8", path.display()))
}

fn mapping_table(flag: Option<&Path>, config: &Config) -> Result<MappingTable> {
    match flag.or(config.mapping.as_deref()) {
        Some(p) => Ok(load_mapping(&read_text(p)?, &p.display().to_string())?),
        None => Ok(builtin::mapping()),
    }
}

fn library(sources: &Sources, config: &Config) -> Result<PolicyLibrary> {
    let mut sets = match sources.policies.as_deref().or(config.policies.as_deref()) {
        Some(dir) => load_policy_dir(dir)?,
        None => builtin::policies(),
    };
    let platform = sets.remove(&Jurisdiction::Platform).ok_or_else(|| anyhow!("no Platform policy file loaded"))?;
    sets.remove(&Jurisdiction::Harmonized);
    Ok(PolicyLibrary { platform, countries: sets, mapping: mapping_table(sources.mapping.as_deref(), config)? })
}

fn permission_registry(flag: Option<&Path>, config: &Config) -> Result<PermissionRegistry> {
    match flag.or(config.permission_registry.as_deref()) {
        Some(p) => Ok(load_permission_registry(&read_text(p)?, &p.display().to_string())?),
        None => Ok(builtin::permission_registry()),
    }
}

/// Stdout that treats a closed pipe as a normal stop.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => emit(&format!("{text}\n")),
    }
}

/// Ok(true) when violations or exfiltration were found.
fn run(cli: Cli) -> Result<bool> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Audit { apk, jurisdiction, sources, out } => {
            let lib = library(&sources, &config)?;
            let ctx = lib.context(jurisdiction)?;
            let audit = audit_apk(&read_file(&apk)?, &ctx).with_context(|| apk.display().to_string())?;
            let report = AuditReport::new(audit, &ctx, now_rfc3339());
            write_or_print(out.as_deref(), &report.to_json())?;
            Ok(report.verdict.any_violation())
        }
        Command::Corpus { registry, apk_dir, sources, out, format, jobs } => {
            let lib = library(&sources, &config)?;
            let table = formats::load_registry(&read_file(&registry)?).with_context(|| registry.display().to_string())?;
            let options = CorpusOptions { jobs: jobs.or(config.jobs).unwrap_or(0), generated_at: None };
            let outcome = run_corpus(&table, &apk_dir, &lib, &options)?;
            for m in &outcome.missing {
                eprintln!("missing APK: {} ({})", m.package_id, m.country);
            }
            for f in &outcome.failures {
                eprintln!("failed: {} ({}): {}", f.package_id, f.country, f.error);
            }
            match out {
                Some(dir) => {
                    let written = emit_report(&outcome.reports, &outcome.summary, format, &dir)?;
                    let notices = serde_json::json!({"missing": outcome.missing, "failures": outcome.failures});
                    std::fs::write(dir.join("notices.json"), serde_json::to_string_pretty(&notices)?)?;
                    eprintln!("wrote {} files to {}", written.len() + 1, dir.display());
                }
                None => emit(&render_summary_table(&outcome.summary))?,
            }
            Ok(outcome.reports.iter().any(|r| r.verdict.any_violation()))
        }
        Command::MapPolicy { doc, jurisdiction, replay, models, permission_registry: reg_path, expected, out, print_request } => {
            let body = read_text(&doc)?;
            let title = doc.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let document = PolicyDocument::new(jurisdiction, &title, &body, &doc.display().to_string())?;
            if print_request {
                emit(&core::mapper::render_prompt(&document).request_text())?;
                return Ok(false);
            }
            let registry = permission_registry(reg_path.as_deref(), &config)?;
            let clients: Vec<Box<dyn TextCompletion>> = match &replay {
                Some(root) => {
                    let ids = if models.is_empty() { ReplayClient::recorded_models(root, jurisdiction) } else { models.clone() };
                    if ids.is_empty() {
                        bail!("no recordings for {jurisdiction} under {}", root.display());
                    }
                    ids.iter().map(|m| Box::new(ReplayClient::new(root, jurisdiction, m)) as Box<dyn TextCompletion>).collect()
                }
                None if models.is_empty() => vec![Box::new(config.llm.client(None)?)],
                None => models.iter().map(|m| Ok(Box::new(config.llm.client(Some(m))?) as Box<dyn TextCompletion>)).collect::<Result<_>>()?,
            };
            let refs: Vec<&dyn TextCompletion> = clients.iter().map(|c| c.as_ref()).collect();
            let run = map_policy(&document, &refs, &registry)?;
            for r in &run.runs {
                for w in &r.warnings {
                    eprintln!("{}: line {}: {}", r.record.model_id, w.line, w.message);
                }
                for x in &r.validation.rejected {
                    eprintln!("{}: rejected {} ({}): {}", x.model_id, x.name, x.data_type, x.reason);
                }
            }
            if !run.review_flags.is_empty() {
                for f in &run.review_flags {
                    eprintln!("review: {} is unconditional in {:?} and conditional in {:?}", f.permission, f.unconditional_in, f.conditional_in);
                }
                emit(&format!("{}\n", serde_json::to_string_pretty(&run)?))?;
                bail!("{} permission(s) need review; no draft written", run.review_flags.len());
            }
            let version = format!("draft-{}", &run.runs[0].record.request_digest[..12]);
            let set = run.draft.clone().into_policy_set(jurisdiction, &version)?;
            if let Some(path) = &expected {
                let expert = load_policy(&read_text(path)?, &path.display().to_string())?;
                let report = diff_against_ground_truth(&set, &expert)?;
                eprintln!("{}", serde_json::to_string_pretty(&report)?);
            }
            write_or_print(out.as_deref(), &formats::policy_to_toml(&set))?;
            Ok(false)
        }
        Command::Dynlog { events, manifest_of, mapping } => {
            let table = mapping_table(mapping.as_deref(), &config)?;
            let manifest = read_manifest(&read_file(&manifest_of)?).with_context(|| manifest_of.display().to_string())?;
            let log = load_events(&events)?;
            let findings = detect_exfiltration(&log, &manifest, &table);
            let doc = serde_json::json!({"package_id": manifest.package_id, "findings": findings});
            emit(&format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            Ok(findings.iter().any(|f| f.pre_registration))
        }
        Command::Hooks { apk, jurisdiction, sources } => {
            let lib = library(&sources, &config)?;
            let ctx = lib.context(jurisdiction)?;
            let audit = audit_apk(&read_file(&apk)?, &ctx).with_context(|| apk.display().to_string())?;
            match generate_hook_plan(&audit.verdict.evidence.flows, &audit.watch_items, &audit.manifest, ctx.mapping) {
                Ok(plan) => emit(&format!("{}\n", serde_json::to_string_pretty(&plan)?))?,
                Err(e) => eprintln!("{e}"),
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
