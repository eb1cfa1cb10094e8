#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "lgan/error.hpp"
#include "lgan/io/config.hpp"
#include "lgan/io/csv.hpp"
#include "lgan/io/pipeline.hpp"
#include "lgan/io/synth.hpp"

using namespace lgan;
using namespace lgan::io;
namespace fs = std::filesystem;

namespace {

const char* kHeader = "TVi,TVe,iTime,eTime,maxF,minF,ipAUC,epAUC,I:E ratio,inst_RR,tve:tvi ratio,patient_id,label\n";

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("lgan-test-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

// Trapezoid over the positive part written as a sum minus the end-point halves.
double positive_area_oracle(const std::vector<double>& f, double dt) {
  double sum = 0.0;
  for (double v : f) sum += v > 0.0 ? v : 0.0;
  const double ends = std::max(f.front(), 0.0) + std::max(f.back(), 0.0);
  return dt * (sum - 0.5 * ends);
}

RunConfig tiny_config(const fs::path& out) {
  RunConfig c;
  c.task = Task::pva_binary_bsa;
  c.synth_n = 240;
  c.patients = 6;
  c.prev_breaths = 1;
  c.discriminator.repeat_count = 1;
  c.discriminator.hidden_channels = 2;
  c.discriminator.dense_units = 4;
  c.generator.noise_dim = 4;
  c.generator.seed_channels = 2;
  c.generator.encoder = {2};
  c.generator.decoder = {2};
  c.lgan.epochs = 2;
  c.lgan.d_pretrain_epochs = 1;
  c.lgan.batch_size = 64;
  c.folds = 2;
  c.replicates = 2;
  c.logistic_epochs = 3;
  c.seed = 11;
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST(BreathCsv, ThreeRowFile) {
  std::istringstream in(std::string(kHeader) +
                        "400,390,1,2,40,-30,24,23.4,0.5,20,0.975,1,Normal\n"
                        "410,200,1.1,0.7,41,-35,24.6,12,1.57,33,0.49,1,BSA\n"
                        "600,590,1.6,2,39,-31,36,35.4,0.8,16.6,0.98,2,DTA\n");
  const auto m = read_breath_csv(in, "t.csv");
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.width(), 11u);
  EXPECT_EQ(m.labels, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(m.group_ids, (std::vector<std::int64_t>{1, 1, 2}));
  EXPECT_DOUBLE_EQ(m.rows[1][3], 0.7);
}

TEST(BreathCsv, ColumnOrderIsFree) {
  std::istringstream in(
      "label,patient_id,tve:tvi ratio,inst_RR,I:E ratio,epAUC,ipAUC,minF,maxF,eTime,iTime,TVe,TVi\n"
      "BSA,4,11,10,9,8,7,6,5,4,3,2,1\n");
  const auto m = read_breath_csv(in);
  EXPECT_EQ(m.rows[0], (std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}));
  EXPECT_EQ(m.group_ids[0], 4);
}

TEST(BreathCsv, UnknownLabelNamesRowAndValue) {
  std::istringstream in(std::string(kHeader) + "400,390,1,2,40,-30,24,23.4,0.5,20,0.975,1,Normal\n" +
                        "400,390,1,2,40,-30,24,23.4,0.5,20,0.975,1,BAD\n");
  try {
    read_breath_csv(in, "t.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("t.csv:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("BAD"), std::string::npos) << e.what();
  }
}

TEST(BreathCsv, BadCellNamesColumn) {
  std::istringstream in(std::string(kHeader) + "400,390,1,x2,40,-30,24,23.4,0.5,20,0.975,1,Normal\n");
  try {
    read_breath_csv(in, "t.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("eTime"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("t.csv:2"), std::string::npos) << e.what();
  }
}

TEST(BreathCsv, MissingColumn) {
  std::istringstream in("TVi,TVe,patient_id,label\n1,2,3,Normal\n");
  EXPECT_THROW(read_breath_csv(in), DataError);
}

TEST(BreathCsv, RoundTripIsBitExact) {
  SynthOptions o;
  o.n = 120;
  o.seed = 5;
  const auto m = synth_dataset(o).data;
  std::stringstream buf;
  write_breath_csv(m, buf);
  const auto back = read_breath_csv(buf);
  ASSERT_EQ(back.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.width(); ++j) {
      EXPECT_EQ(std::memcmp(&back.rows[i][j], &m.rows[i][j], sizeof(double)), 0) << i << "," << j;
    }
  }
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.group_ids, m.group_ids);
}

TEST(EcgCsv, FullLengthRowUnchanged) {
  std::ostringstream row;
  std::vector<double> samples;
  for (int j = 0; j < 144; ++j) {
    samples.push_back(0.001 * j);
    row << format_double(samples.back()) << ',';
  }
  row << "2\n";
  std::istringstream in(row.str());
  const auto m = read_ecg_csv(in, EcgLabelSet::mitbih);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.rows[0], samples);
  EXPECT_EQ(m.class_names[static_cast<std::size_t>(m.labels[0])], "V");
}

TEST(EcgCsv, ShortRowZeroPadded) {
  std::ostringstream row;
  for (int j = 0; j < 100; ++j) row << 0.5 << ',';
  row << "0.0\n";
  std::istringstream in(row.str());
  const auto m = read_ecg_csv(in, EcgLabelSet::ptb);
  ASSERT_EQ(m.rows[0].size(), 144u);
  for (std::size_t j = 0; j < 144; ++j) EXPECT_EQ(m.rows[0][j], j < 100 ? 0.5 : 0.0) << j;
  EXPECT_EQ(m.labels[0], 0);
}

TEST(EcgCsv, MitbihCodesMapInOrder) {
  std::istringstream in("0.1,0\n0.1,1\n0.1,2\n0.1,3\n0.1,4\n");
  const auto m = read_ecg_csv(in, EcgLabelSet::mitbih);
  const std::vector<std::string> expected{"N", "S", "V", "F", "Q"};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(m.class_names[static_cast<std::size_t>(m.labels[i])], expected[i]);
}

TEST(EcgCsv, Errors) {
  std::istringstream bad_code("0.1,0.2,5\n");
  EXPECT_THROW(read_ecg_csv(bad_code, EcgLabelSet::mitbih), DataError);
  std::istringstream ptb_code("0.1,0.2,2\n");
  EXPECT_THROW(read_ecg_csv(ptb_code, EcgLabelSet::ptb), DataError);
  std::istringstream bad_sample("0.1,abc,1\n");
  EXPECT_THROW(read_ecg_csv(bad_sample, EcgLabelSet::mitbih), DataError);
  std::ostringstream too_long;
  for (int j = 0; j < 188; ++j) too_long << "0,";
  too_long << "1\n";
  std::istringstream long_in(too_long.str());
  EXPECT_THROW(read_ecg_csv(long_in, EcgLabelSet::mitbih), DataError);
}

TEST(Synth, PriorCount) {
  for (auto kind : {SynthKind::pva, SynthKind::ecg}) {
    SynthOptions o;
    o.kind = kind;
    o.n = 1000;
    o.anomaly_fraction = 0.3;
    o.seed = 3;
    const auto r = synth_dataset(o);
    const auto counts = r.data.class_counts();
    EXPECT_EQ(r.data.size(), 1000u);
    EXPECT_EQ(counts[0], 700u);
    EXPECT_EQ(r.anomalies, 300u);
  }
}

TEST(Synth, TooSmallForBothClasses) {
  SynthOptions o;
  o.n = 2;
  o.anomaly_fraction = 0.1;
  EXPECT_THROW(synth_dataset(o), ConfigError);
  o.anomaly_fraction = 1.0;
  EXPECT_THROW(synth_dataset(o), ConfigError);
}

TEST(Synth, FixedSeedIsByteIdentical) {
  for (auto kind : {SynthKind::pva, SynthKind::ecg}) {
    SynthOptions o;
    o.kind = kind;
    o.n = 300;
    o.seed = 42;
    std::ostringstream a, b;
    const auto ra = synth_dataset(o), rb = synth_dataset(o);
    kind == SynthKind::pva ? write_breath_csv(ra.data, a) : write_ecg_csv(ra.data, a);
    kind == SynthKind::pva ? write_breath_csv(rb.data, b) : write_ecg_csv(rb.data, b);
    EXPECT_EQ(a.str(), b.str());
    o.seed = 43;
    std::ostringstream c;
    const auto rc = synth_dataset(o);
    kind == SynthKind::pva ? write_breath_csv(rc.data, c) : write_ecg_csv(rc.data, c);
    EXPECT_NE(a.str(), c.str());
  }
}

TEST(Synth, HalfSineAreaMatchesClosedForm) {
  BreathShape s;
  s.peak_flow = 40.0;
  s.inspiratory_time = 1.0;
  const auto flow = breath_waveform(s);
  const auto f = breath_features(flow);
  const double exact = 2.0 * s.peak_flow * s.inspiratory_time / std::numbers::pi;
  EXPECT_NEAR(f[6], exact, 0.005 * exact);
  EXPECT_NEAR(f[0], exact * 1000.0 / 60.0, 0.005 * exact * 1000.0 / 60.0);
  // Expiration returns the inspired volume.
  EXPECT_NEAR(f[7], exact, 0.02 * exact);
}

TEST(Synth, IpAucMatchesIntegrationOracle) {
  SynthOptions o;
  o.n = 200;
  o.seed = 9;
  const auto r = synth_dataset(o);
  ASSERT_EQ(r.signals.size(), r.data.size());
  const std::size_t ip = r.data.column_index("ipAUC");
  const std::size_t ep = r.data.column_index("epAUC");
  for (std::size_t i = 0; i < r.data.size(); ++i) {
    const auto& f = r.signals[i];
    std::vector<double> neg(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) neg[k] = -f[k];
    EXPECT_NEAR(r.data.rows[i][ip], positive_area_oracle(f, kFlowSampleInterval), 1e-9) << i;
    EXPECT_NEAR(r.data.rows[i][ep], positive_area_oracle(neg, kFlowSampleInterval), 1e-9) << i;
  }
}

TEST(Synth, AnomaliesShiftTheirFeatures) {
  SynthOptions o;
  o.n = 600;
  o.seed = 4;
  o.sample_noise = 0.0;
  const auto m = synth_dataset(o).data;
  const auto e = m.column_index("eTime");
  const auto v = m.column_index("TVi");
  double e_sum[3] = {}, v_sum[3] = {};
  std::size_t n[3] = {};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto l = static_cast<std::size_t>(m.labels[i]);
    e_sum[l] += m.rows[i][e];
    v_sum[l] += m.rows[i][v];
    ++n[l];
  }
  EXPECT_LT(e_sum[1] / n[1], 0.6 * e_sum[0] / n[0]);  // shortened expiration
  EXPECT_GT(v_sum[2] / n[2], 1.3 * v_sum[0] / n[0]);  // second inspiration adds volume
}

TEST(Config, ParsesCommentsAndBlankLines) {
  std::istringstream in("# run\n\ntask = pva-multiclass  # inline\nseed=9\n");
  const auto kv = parse_key_values(in);
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].key, "task");
  EXPECT_EQ(kv[0].value, "pva-multiclass");
  EXPECT_EQ(kv[1].line, 4u);
}

TEST(Config, DuplicateAndMalformedLines) {
  std::istringstream dup("seed = 1\nseed = 2\n");
  EXPECT_THROW(parse_key_values(dup), ConfigError);
  std::istringstream bare("seed\n");
  EXPECT_THROW(parse_key_values(bare), ConfigError);
}

TEST(Config, UnknownKeyAndBadValueNameTheLine) {
  try {
    apply_key_values({}, {{"nope", "1", 7}}, "run.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.conf:7"), std::string::npos) << e.what();
  }
  EXPECT_THROW(apply_key_values({}, {{"lgan.epochs", "ten", 1}}), ConfigError);
  EXPECT_THROW(apply_key_values({}, {{"task", "ecg", 1}}), ConfigError);
  EXPECT_THROW(apply_key_values({}, {{"resample.method", "adasyn", 1}}), ConfigError);
}

TEST(Config, ValidationRejectsOutOfRange) {
  RunConfig c;
  c.prev_breaths = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.test_fraction = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lgan.lambda = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.baselines = {"svm"};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, RenderRoundTrips) {
  RunConfig c;
  c.task = Task::ecg_multiclass;
  c.seed = 123456789012345ULL;
  c.lgan.d_optimizer.learning_rate = 0.00123;
  c.lgan.real_label_smoothing = 0.1;
  c.generator.encoder = {3, 5};
  c.baselines = {"logistic"};
  c.select_method = features::ScoreMethod::chi2;
  c.select_top = 4;
  const std::string text = render_run_config(c);
  std::istringstream in(text);
  const auto back = apply_key_values({}, parse_key_values(in));
  EXPECT_EQ(render_run_config(back), text);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.generator.encoder, c.generator.encoder);
  EXPECT_DOUBLE_EQ(back.lgan.d_optimizer.learning_rate, 0.00123);
}

TEST(Pipeline, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 1; s <= 7; ++s) {
    for (std::uint64_t i = 0; i < 5; ++i) seen.insert(derive_seed(3, s, i));
  }
  EXPECT_EQ(seen.size(), 35u);
  EXPECT_EQ(derive_seed(3, 2, 1), derive_seed(3, 2, 1));
  EXPECT_NE(derive_seed(3, 2, 1), derive_seed(4, 2, 1));
}

TEST(Pipeline, TaskRowsAreFilteredAndRelabeled) {
  SynthOptions o;
  o.n = 300;
  o.seed = 2;
  const auto m = synth_dataset(o).data;
  const auto dta = select_task_rows(m, Task::pva_binary_dta);
  EXPECT_EQ(dta.class_names, (std::vector<std::string>{"Normal", "DTA"}));
  const auto counts = m.class_counts();
  EXPECT_EQ(dta.size(), counts[0] + counts[2]);
  EXPECT_EQ(dta.class_counts()[1], counts[2]);
  EXPECT_EQ(select_task_rows(m, Task::pva_multiclass).size(), m.size());
}

TEST(Pipeline, ResamplingReachesParityWithTaggedRows) {
  SynthOptions o;
  o.n = 400;
  o.seed = 8;
  const auto m = synth_dataset(o).data;
  RunConfig c;
  const auto r = resample_training(m, c, 1);
  const auto counts = r.data.class_counts();
  EXPECT_EQ(counts[1], counts[0]);
  EXPECT_EQ(counts[2], counts[0]);
  EXPECT_EQ(r.synthetic, r.data.size() - m.size());
  for (std::size_t i = m.size(); i < r.data.size(); ++i) {
    EXPECT_LT(r.data.row_ids[i], 0);
    EXPECT_EQ(r.data.group_ids[i], -1);
  }
  c.resample = ResampleMethod::none;
  EXPECT_EQ(resample_training(m, c, 1).data.size(), m.size());
}

TEST(Pipeline, LayoutFollowsTask) {
  const auto pva = task_layout(Task::pva_binary_bsa, 8, 2);
  EXPECT_EQ(pva.time, 3u);
  EXPECT_EQ(pva.width, 8u);
  EXPECT_TRUE(pva.newest_first);
  const auto ecg = task_layout(Task::ecg_binary, 144, 2);
  EXPECT_EQ(ecg.time, 1u);
  EXPECT_EQ(ecg.height, 12u);
  EXPECT_THROW(task_layout(Task::ecg_binary, 100, 0), ConfigError);
}

TEST(Pipeline, NoLeakageEqualReplicatesAndDeterminism) {
  const auto d = temp_dir("p1");
  const auto r1 = run_pipeline(tiny_config(d));
  std::map<std::string, std::string> first;
  for (const auto& f : r1.files) first[f] = read_all(d / f);
  const auto r2 = run_pipeline(tiny_config(d));
  EXPECT_EQ(r1.leaked_rows, 0u);
  EXPECT_EQ(r1.train_rows + r1.test_rows, r1.rows);
  EXPECT_EQ(r1.fold_accuracies.size(), 2u);
  ASSERT_EQ(r1.runs.size(), 3u);
  for (const auto& run : r1.runs) EXPECT_EQ(run.accuracies.size(), 2u) << run.name;
  for (const auto& v : r1.history.d_loss) EXPECT_TRUE(std::isfinite(v));
  ASSERT_EQ(r1.files, r2.files);
  for (const auto& f : r2.files) EXPECT_EQ(read_all(d / f), first[f]) << f;
  fs::remove_all(d);
}

TEST(Pipeline, BaselinesDisabledKeepReplicateCount) {
  const auto d = temp_dir("p3");
  auto c = tiny_config(d);
  c.baselines.clear();
  c.folds = 0;
  const auto r = run_pipeline(c);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_EQ(r.runs[0].accuracies.size(), 2u);
  EXPECT_FALSE(r.anova.has_value());
  EXPECT_TRUE(r.fold_accuracies.empty());
  fs::remove_all(d);
}

TEST(Pipeline, StageErrorsCarryTheStageName) {
  auto c = tiny_config(temp_dir("p4"));
  c.data = "/nonexistent/breaths.csv";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("load: ", 0), 0u) << e.what();
  }
  c = tiny_config(temp_dir("p5"));
  c.feature_preset = "TVi,nope";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("features: ", 0), 0u) << e.what();
  }
}

TEST(Pipeline, ReadsBreathFilesWithoutMutatingThem) {
  const auto d = temp_dir("p6");
  fs::create_directories(d);
  SynthOptions o;
  o.n = 240;
  o.patients = 6;
  o.anomaly_classes = {"BSA"};
  o.seed = 1;
  save_breath_csv(synth_dataset(o).data, (d / "in.csv").string());
  const std::string before = read_all(d / "in.csv");
  auto c = tiny_config(d / "out");
  c.data = (d / "in.csv").string();
  c.baselines.clear();
  c.folds = 0;
  c.replicates = 1;
  const auto r = run_pipeline(c);
  EXPECT_EQ(read_all(d / "in.csv"), before);
  EXPECT_EQ(r.leaked_rows, 0u);
  EXPECT_TRUE(fs::exists(d / "out" / "model.lgan"));
  fs::remove_all(d);
}
