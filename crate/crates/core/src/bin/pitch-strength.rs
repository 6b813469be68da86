use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pitch_strength::dsp::{freq_to_midi, pick_spectral_peaks, welch_spectrum, FramePlan, Window};
use pitch_strength::features::FeatureParams;
use pitch_strength::pipeline::{
    analyze_track, fit_space, gen_synthetic_corpus, load_corpus_dir, report_rows, rows_to_json,
    run_eq_sweep_experiment, segment_features, svg_scatter, write_csv, AnalysisParams, BeatGrid,
    SyntheticCorpusSpec,
};
use pitch_strength::salience_eq::{apply_salience_gain, SalienceSettings};
use pitch_strength::space::SpaceModel;
use pitch_strength::synth::{
    apply_waveshaper, gen_irn, gen_mauch_tone, gen_reference_sound, gen_sine, gen_white_noise,
    IrnNetwork, IrnSpec, MauchToneSpec, OutputNormalization, ReferenceSoundSpec, WaveshaperSpec,
};
use pitch_strength::{load_audio, save_audio, AudioBuffer, BitDepth, Error, Result};

#[derive(Parser)]
#[command(name = "pitch-strength", version, about = "Pitch-strength analysis of WAV files")]
struct Cli {
    /// Loudness level of the ISO 226 weighting applied before flatness.
    #[arg(long, global = true, default_value_t = 60.0)]
    phon: f64,
    /// Disable loudness weighting.
    #[arg(long, global = true)]
    no_weighting: bool,
    /// Analysis frame length in samples.
    #[arg(long, global = true, default_value_t = 4096)]
    frame: usize,
    /// Analysis hop in samples.
    #[arg(long, global = true, default_value_t = 1024)]
    hop: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test signal.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Pass a file through a polynomial waveshaper.
    Distort {
        #[arg(short, long)]
        input: PathBuf,
        /// Coefficients c0,c1,... in ascending powers.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        /// Scale the result to unit peak.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Scale formant salience by 1 + gain.
    Eq {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gain: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Beat-by-beat features of one track, as CSV (or JSON for a .json output).
    Analyze {
        #[arg(short, long)]
        input: PathBuf,
        /// Beat annotation JSON.
        #[arg(long, conflicts_with = "bpm", required_unless_present = "bpm")]
        beats: Option<PathBuf>,
        /// Fixed tempo instead of an annotation file.
        #[arg(long)]
        bpm: Option<f64>,
        /// First beat time for --bpm.
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        /// Space model; without it only raw features are reported.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a scatter plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Whole-track features as JSON.
    Features {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Spectral peaks of the averaged spectrum with MIDI note numbers.
    Peaks {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        prominence_db: f64,
        #[arg(long, default_value_t = 20.0)]
        separation_hz: f64,
    },
    /// Noisiness-inharmonicity space.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Write a synthetic corpus (WAV files plus manifest).
    Corpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        n_tracks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        dur: f64,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// One of the eleven graded reference sounds.
    Reference {
        #[arg(long)]
        id: u8,
        #[arg(long, default_value_t = 500)]
        freq: u32,
        #[command(flatten)]
        common: SynthArgs,
    },
    /// Iterated rippled noise.
    Irn {
        /// Delay in seconds (pitch at 1/delay).
        #[arg(long)]
        delay: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        gain: f64,
        #[arg(long, default_value_t = 8)]
        iterations: u32,
        #[arg(long, value_enum, default_value_t = Network::AddSame)]
        network: Network,
        #[command(flatten)]
        common: SynthArgs,
    },
    /// Harmonic tone with geometric partial decay.
    Mauch {
        #[arg(long)]
        f0: f64,
        #[arg(long, default_value_t = 0.8)]
        s: f64,
        #[arg(long, default_value_t = 10)]
        harmonics: u32,
        #[command(flatten)]
        common: SynthArgs,
    },
    /// Sine at a given amplitude.
    Sine {
        #[arg(long)]
        freq: f64,
        #[arg(long, default_value_t = 0.5)]
        amp: f64,
        #[command(flatten)]
        common: SynthArgs,
    },
    /// Gaussian white noise.
    Noise {
        #[command(flatten)]
        common: SynthArgs,
    },
}

#[derive(Subcommand)]
enum SpaceCommand {
    /// Fit normalization bounds and principal axes on a corpus directory.
    Fit {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Median and quartiles of a corpus under a salience-gain sweep.
    Sweep {
        #[arg(long)]
        corpus: PathBuf,
        /// Fixed space; fitted on the unprocessed corpus when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, default_value = "-1,-0.5,0,0.5,1")]
        gains: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1.0)]
    dur: f64,
    #[arg(long, default_value_t = 48000)]
    sr: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(short, long)]
    output: PathBuf,
    /// 16, 24 or f32.
    #[arg(long, default_value = "f32")]
    bits: BitDepth,
}

#[derive(Clone, Copy, ValueEnum)]
enum Network {
    AddSame,
    AddOriginal,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let params = analysis_params(cli)?;
    match &cli.command {
        Command::Synth(cmd) => synth(cmd),
        Command::Distort {
            input,
            poly,
            normalize,
            out,
        } => {
            let mut spec = WaveshaperSpec::new(parse_list(poly)?);
            if *normalize {
                spec.output_normalization = OutputNormalization::Peak;
            }
            write_audio(&apply_waveshaper(&load_audio(input)?, &spec)?, out)
        }
        Command::Eq { input, gain, out } => {
            let settings = SalienceSettings {
                gain: *gain,
                frame_len: cli.frame,
                hop: cli.hop,
                ..SalienceSettings::default()
            };
            write_audio(&apply_salience_gain(&load_audio(input)?, &settings)?, out)
        }
        Command::Analyze {
            input,
            beats,
            bpm,
            offset,
            model,
            output,
            svg,
        } => {
            let audio = load_audio(input)?;
            let grid = match (beats, bpm) {
                (Some(path), _) => BeatGrid::load(path, audio.duration_s())?,
                (None, Some(bpm)) => BeatGrid::from_bpm(*bpm, *offset, audio.duration_s())?,
                (None, None) => return Err(Error::InvalidSpec("need --beats or --bpm".into())),
            };
            let model = model.as_ref().map(SpaceModel::load).transpose()?;
            let report = analyze_track(&track_id(input), &audio, &grid, model.as_ref(), &params)?;
            let rows = report_rows(&report);
            let is_json = output
                .as_ref()
                .and_then(|p| p.extension())
                .is_some_and(|e| e.eq_ignore_ascii_case("json"));
            let mut sink = open_output(output.as_deref())?;
            if is_json {
                writeln!(sink, "{}", rows_to_json(&rows)).map_err(|e| io_err(output.as_deref(), e))?;
            } else {
                write_csv(&rows, &mut sink)?;
            }
            sink.flush().map_err(|e| io_err(output.as_deref(), e))?;
            if let Some(path) = svg {
                std::fs::write(path, svg_scatter(&rows, model.as_ref()))
                    .map_err(|e| io_err(Some(path), e))?;
            }
            if report.degenerate_beats() > 0 {
                eprintln!("{} of {} beats were silent", report.degenerate_beats(), report.beats.len());
            }
            Ok(())
        }
        Command::Features { input, model } => {
            let audio = load_audio(input)?;
            let (mut f, degenerate) = segment_features(&audio, &params)?;
            let mut doc = serde_json::json!({
                "track_id": track_id(input),
                "degenerate": degenerate,
            });
            if let Some(path) = model {
                let (pc1, pc2) = SpaceModel::load(path)?.apply(&mut f)?;
                doc["pc1"] = pc1.into();
                doc["pc2"] = pc2.into();
            }
            doc["harmonic_ratio"] = f.harmonic_ratio.into();
            doc["flatness"] = f.flatness.into();
            doc["inharmonicity_norm"] = f.inharmonicity_norm.into();
            doc["noisiness_norm"] = f.noisiness_norm.into();
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&doc).expect("json value"));
            Ok(())
        }
        Command::Peaks {
            input,
            prominence_db,
            separation_hz,
        } => {
            let audio = load_audio(input)?;
            let spectrum = welch_spectrum(&audio, &params.plan)?;
            let mut w = csv::Writer::from_writer(io::stdout());
            let csv_err = |e: csv::Error| Error::Format(e.to_string());
            w.write_record(["freq_hz", "power_db", "midi"]).map_err(csv_err)?;
            for p in pick_spectral_peaks(&spectrum, *prominence_db, *separation_hz) {
                w.write_record([
                    format!("{:.3}", p.freq_hz),
                    format!("{:.2}", p.power_db),
                    format!("{:.2}", freq_to_midi(p.freq_hz)?),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(|e| io_err(None, e))
        }
        Command::Space(cmd) => space(cmd, &params),
        Command::Corpus {
            out,
            n_tracks,
            seed,
            dur,
        } => {
            let spec = SyntheticCorpusSpec {
                n_tracks: *n_tracks,
                seed: *seed,
                duration_s: *dur,
                ..SyntheticCorpusSpec::default()
            };
            gen_synthetic_corpus(&spec)?.write(out)
        }
    }
}

fn synth(cmd: &SynthCommand) -> Result<()> {
    let (audio, common) = match cmd {
        SynthCommand::Reference { id, freq, common } => {
            let mut s = ReferenceSoundSpec::new(*id, *freq);
            s.duration_s = common.dur;
            s.sample_rate_hz = common.sr;
            s.seed = common.seed;
            (gen_reference_sound(&s)?, common)
        }
        SynthCommand::Irn {
            delay,
            gain,
            iterations,
            network,
            common,
        } => {
            let mut s = IrnSpec::new(*delay, *gain, *iterations);
            s.duration_s = common.dur;
            s.sample_rate_hz = common.sr;
            s.seed = common.seed;
            s.network = match network {
                Network::AddSame => IrnNetwork::AddSame,
                Network::AddOriginal => IrnNetwork::AddOriginal,
            };
            (gen_irn(&s)?, common)
        }
        SynthCommand::Mauch {
            f0,
            s,
            harmonics,
            common,
        } => {
            let mut spec = MauchToneSpec::new(*f0);
            spec.s = *s;
            spec.n_harmonics = *harmonics;
            spec.duration_s = common.dur;
            spec.sample_rate_hz = common.sr;
            (gen_mauch_tone(&spec)?, common)
        }
        SynthCommand::Sine { freq, amp, common } => (gen_sine(*freq, *amp, common.dur, common.sr)?, common),
        SynthCommand::Noise { common } => (gen_white_noise(common.dur, common.sr, common.seed)?, common),
    };
    write_audio(&audio, &common.out)
}

fn space(cmd: &SpaceCommand, params: &AnalysisParams) -> Result<()> {
    match cmd {
        SpaceCommand::Fit { corpus, model_out } => {
            let tracks: Vec<AudioBuffer> = load_corpus_dir(corpus)?.into_iter().map(|(_, a)| a).collect();
            let model = fit_space(&tracks, params)?;
            model.save(model_out)?;
            eprintln!("fitted on {} tracks", tracks.len());
            Ok(())
        }
        SpaceCommand::Sweep {
            corpus,
            model,
            gains,
            output,
        } => {
            let gains = parse_list(gains)?;
            let tracks: Vec<AudioBuffer> = load_corpus_dir(corpus)?.into_iter().map(|(_, a)| a).collect();
            let model = match model {
                Some(p) => SpaceModel::load(p)?,
                None => fit_space(&tracks, params)?,
            };
            let eq = SalienceSettings {
                frame_len: params.plan.frame_len,
                hop: params.plan.hop,
                ..SalienceSettings::default()
            };
            let rows = run_eq_sweep_experiment(&tracks, &model, &gains, &eq, params)?;
            let mut w = csv::Writer::from_writer(open_output(output.as_deref())?);
            let csv_err = |e: csv::Error| Error::Format(e.to_string());
            w.write_record([
                "gain",
                "median_noisiness",
                "median_inharmonicity",
                "p25_noisiness",
                "p25_inharmonicity",
                "p75_noisiness",
                "p75_inharmonicity",
                "median_pc1",
                "median_pc2",
            ])
            .map_err(csv_err)?;
            for r in rows {
                let fields = [
                    r.gain,
                    r.median.noisiness_norm,
                    r.median.inharmonicity_norm,
                    r.p25.noisiness_norm,
                    r.p25.inharmonicity_norm,
                    r.p75.noisiness_norm,
                    r.p75.inharmonicity_norm,
                    r.median_pc.0,
                    r.median_pc.1,
                ];
                w.write_record(fields.iter().map(|v| v.to_string())).map_err(csv_err)?;
            }
            w.flush().map_err(|e| io_err(output.as_deref(), e))
        }
    }
}

fn analysis_params(cli: &Cli) -> Result<AnalysisParams> {
    let plan = FramePlan::new(cli.frame, cli.hop, Window::Hann)?;
    let features = FeatureParams {
        weighting_phon: if cli.no_weighting { None } else { Some(cli.phon) },
        ..FeatureParams::default()
    };
    Ok(AnalysisParams { plan, features })
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidSpec(format!("'{s}' is not a number")))
        })
        .collect()
}

fn track_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "track".into())
}

fn write_audio(audio: &AudioBuffer, out: &OutputArgs) -> Result<()> {
    let report = save_audio(audio, &out.output, out.bits)?;
    if report.clipped_samples > 0 {
        eprintln!("warning: {} samples clipped", report.clipped_samples);
    }
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(Some(p), e))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn io_err(path: Option<&Path>, e: io::Error) -> Error {
    Error::Io {
        path: path.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into()),
        source: e,
    }
}
