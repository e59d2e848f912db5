use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use motioncomic_core::analysis::{Analyzer, AnalyzerError, AnalyzerRequest, FixtureAnalyzer, LlmAnalyzer, LlmAnalyzerConfig};
use motioncomic_core::authoring::{AuthoringError, Script};
use motioncomic_core::design_space::{self, design_space_document};
use motioncomic_core::document::{self, assets, DocumentError, ProjectDocument};
use motioncomic_core::render::{self, RenderError};
use motioncomic_service::{AppState, ServiceConfig};

/// Turns stories into motion comics without the studio.
///
/// Exit codes: 0 ok, 2 input error, 3 configuration error, 4 authoring
/// error, 5 analyzer error.
#[derive(Parser)]
#[command(name = "motioncomic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment, extract and classify a story into a new project file.
    Analyze {
        #[arg(long)]
        story: PathBuf,
        #[command(flatten)]
        analyzer: AnalyzerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply an authoring script to a project and export the motion comic.
    Compile {
        #[arg(long)]
        project: PathBuf,
        #[arg(long)]
        authoring: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = render::DEFAULT_FPS)]
        fps: u32,
        #[command(flatten)]
        analyzer: AnalyzerArgs,
    },
    /// Render one saved scene to SVG frames.
    Render {
        #[arg(long)]
        project: PathBuf,
        #[arg(long)]
        scene: usize,
        #[arg(long, default_value_t = render::DEFAULT_FPS)]
        fps: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print ranked animation suggestions for a scene's actions.
    Suggest {
        #[arg(long)]
        project: PathBuf,
        #[arg(long)]
        scene: usize,
    },
    /// Print the design space: frequency table, operations and templates.
    DesignSpace,
    /// Run the HTTP service on DB_PORT.
    Serve {
        #[command(flatten)]
        analyzer: AnalyzerArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzerKind {
    Llm,
    Fixture,
}

#[derive(Args)]
struct AnalyzerArgs {
    #[arg(long, value_enum)]
    analyzer: Option<AnalyzerKind>,
    /// Recorded analyzer responses; implies `--analyzer fixture`.
    #[arg(long)]
    fixture: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Authoring(String),
    #[error("{0}")]
    Analyzer(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Authoring(_) => 4,
            CliError::Analyzer(_) => 5,
        }
    }
}

fn analyzer_failure(e: &DocumentError) -> bool {
    matches!(e, DocumentError::Analysis(a) if !matches!(a.code(), "EmptyStory" | "SpanOutOfRange" | "UnknownAction"))
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        if analyzer_failure(&e) {
            CliError::Analyzer(format!("{}: {e}", e.code()))
        } else {
            CliError::Input(format!("{}: {e}", e.code()))
        }
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Document(d) => d.into(),
            e => CliError::Input(format!("{}: {e}", e.code())),
        }
    }
}

impl From<AuthoringError> for CliError {
    fn from(e: AuthoringError) -> Self {
        match &e {
            AuthoringError::Io(_) => CliError::Input(e.to_string()),
            AuthoringError::Step { source, .. } if analyzer_failure(source) => CliError::Analyzer(e.to_string()),
            _ => CliError::Authoring(e.to_string()),
        }
    }
}

/// Stands in when no analyzer was configured; any call fails.
struct Offline;

impl Analyzer for Offline {
    fn complete(&self, _: &AnalyzerRequest) -> Result<String, AnalyzerError> {
        Err(AnalyzerError::Unavailable("no analyzer configured; pass --analyzer or --fixture".into()))
    }
}

impl AnalyzerArgs {
    fn build(&self, default: Option<AnalyzerKind>) -> Result<Arc<dyn Analyzer>, CliError> {
        let kind = self.analyzer.or(self.fixture.as_ref().map(|_| AnalyzerKind::Fixture)).or(default);
        match kind {
            None => Ok(Arc::new(Offline)),
            Some(AnalyzerKind::Llm) => {
                let config = LlmAnalyzerConfig::from_env().map_err(|e| CliError::Config(format!("ConfigError: {e}")))?;
                let llm = LlmAnalyzer::new(config).map_err(|e| CliError::Config(format!("ConfigError: {e}")))?;
                Ok(Arc::new(llm))
            }
            Some(AnalyzerKind::Fixture) => {
                let path = self
                    .fixture
                    .as_ref()
                    .ok_or_else(|| CliError::Input("--analyzer fixture needs --fixture FILE".into()))?;
                let f = FixtureAnalyzer::load(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Ok(Arc::new(f))
            }
        }
    }
}

fn read_story(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(document::story_from_bytes(&bytes)?)
}

fn load_project(path: &Path) -> Result<ProjectDocument, CliError> {
    document::load(path).map_err(|e| CliError::Input(format!("{}: {}: {e}", path.display(), e.code())))
}

fn analyze(story: &Path, analyzer: &AnalyzerArgs, out: &Path) -> Result<String, CliError> {
    let text = read_story(story)?;
    let analyzer = analyzer.build(Some(AnalyzerKind::Llm))?;
    let doc = ProjectDocument::new_project(&text, &*analyzer)?;
    document::save(&doc, out)?;
    let actions: usize = doc.scenes.iter().map(|s| s.scene.actions.len()).sum();
    Ok(format!(
        "{} sentences, {} scenes, {} actions -> {}\n",
        doc.story.len(),
        doc.scenes.len(),
        actions,
        out.display()
    ))
}

fn export_to(doc: &ProjectDocument, fps: u32, only: Option<usize>, out: &Path) -> Result<render::ExportSummary, CliError> {
    let x = render::export_document(doc, fps, only)?;
    Ok(render::write_export(doc, &x, out, assets::builtin_root_from_env().as_deref())?)
}

fn compile(project: &Path, authoring: &Path, out: &Path, fps: u32, analyzer: &AnalyzerArgs) -> Result<String, CliError> {
    let mut doc = load_project(project)?;
    let script = Script::load(authoring)?;
    let analyzer = analyzer.build(None)?;
    script.apply(&mut doc, &*analyzer)?;
    document::save(&doc, out.join(document::PROJECT_FILE))?;
    let s = export_to(&doc, fps, None, out)?;
    Ok(format!(
        "{} mutations applied; {} scenes, {} frames, {} assets -> {}\n",
        script.mutations.len(),
        s.scenes,
        s.frames,
        s.assets,
        out.display()
    ))
}

fn render_scene(project: &Path, scene: usize, fps: u32, out: &Path) -> Result<String, CliError> {
    let doc = load_project(project)?;
    let s = export_to(&doc, fps, Some(scene), out)?;
    Ok(format!("scene {scene}: {} frames at {fps} fps -> {}\n", s.frames, out.display()))
}

fn suggest(project: &Path, scene: usize) -> Result<String, CliError> {
    let doc = load_project(project)?;
    let entry = doc.scene(scene)?;
    let mut out = String::new();
    for a in &entry.scene.actions {
        let category = a.category.map(|c| c.token()).unwrap_or("-");
        writeln!(out, "action {} [{category}] {} {} {}", a.id, a.subject, a.verb, a.object).unwrap();
        match design_space::suggest(a) {
            Ok(list) => {
                for s in list {
                    writeln!(out, "  {:>2}  {:<32} {:>5}  {}", s.rank, s.template.id, s.score, s.template.label).unwrap();
                }
            }
            Err(e) => writeln!(out, "  ({e})").unwrap(),
        }
    }
    Ok(out)
}

fn serve(analyzer: &AnalyzerArgs) -> Result<String, CliError> {
    let config = ServiceConfig::from_env().map_err(|e| CliError::Config(format!("ConfigError: {e}")))?;
    let analyzer = analyzer.build(Some(AnalyzerKind::Llm))?;
    let state = AppState::new(analyzer, assets::builtin_root_from_env());
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Config(e.to_string()))?;
    rt.block_on(motioncomic_service::serve(state, config))
        .map_err(|e| CliError::Config(format!("cannot serve: {e}")))?;
    Ok(String::new())
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Analyze { story, analyzer, out } => analyze(&story, &analyzer, &out),
        Command::Compile { project, authoring, out, fps, analyzer } => compile(&project, &authoring, &out, fps, &analyzer),
        Command::Render { project, scene, fps, out } => render_scene(&project, scene, fps, &out),
        Command::Suggest { project, scene } => suggest(&project, scene),
        Command::DesignSpace => Ok(serde_json::to_string_pretty(&design_space_document()).expect("json") + "\n"),
        Command::Serve { analyzer } => serve(&analyzer),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
