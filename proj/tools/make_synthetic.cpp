// Writes the bundled stand-in datasets: a separable two-class corpus and three
// source files with the per-label counts of the real sources, each in its own
// column layout and label spelling.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "hoaxdet/core/rng.hpp"
#include "hoaxdet/harness/io.hpp"
#include "hoaxdet/ingest/corpus.hpp"
#include "hoaxdet/ingest/csv.hpp"

namespace {

using hoaxdet::Label;
using hoaxdet::Rng;

const std::vector<std::string> kNeutral = {
    "pemerintah", "masyarakat", "warga",     "kota",      "desa",      "provinsi", "jakarta",    "bandung",
    "surabaya",   "medan",      "makassar",  "presiden",  "menteri",   "gubernur", "bupati",     "polisi",
    "sekolah",    "rumah",      "sakit",     "jalan",     "pasar",     "harga",    "beras",      "minyak",
    "listrik",    "air",        "banjir",    "gempa",     "hujan",     "cuaca",    "vaksin",     "virus",
    "corona",     "kesehatan",  "pendidikan", "ekonomi",  "politik",   "pemilu",   "partai",     "calon",
    "kampanye",   "anggaran",   "bantuan",   "sosial",    "tenaga",    "kerja",    "pekerja",    "buruh",
    "petani",     "nelayan",    "mahasiswa", "guru",      "dokter",    "pasien",   "bandara",    "pesawat",
    "kereta",     "kapal",      "pelabuhan", "tol",       "kendaraan", "motor",    "mobil",      "lalu",
    "lintas",     "kecelakaan", "kebakaran", "hutan",     "sungai",    "laut",     "pulau",      "wisata",
    "budaya",     "agama",      "masjid",    "gereja",    "festival",  "olahraga", "sepak",      "bola",
    "tim",        "pemain",     "pertandingan", "juara",  "uang",      "rupiah",   "bank",       "pajak",
    "usaha",      "kecil",      "pabrik",    "produksi",  "impor",     "ekspor",   "teknologi",  "internet",
    "ponsel",     "aplikasi",   "media",     "televisi",  "radio",     "berita",   "pekan",      "bulan",
    "tahun",      "hari",       "pagi",      "malam",     "ribu",      "juta",     "miliar",     "persen",
    "wilayah",    "daerah",     "pusat",     "kantor",    "gedung",    "lokasi",   "kejadian",   "peristiwa"};

const std::vector<std::string> kValidKeywords = {
    "resmi",      "kementerian", "statistik", "laporan",    "konfirmasi", "keterangan", "narasumber",  "rilis",
    "verifikasi", "akurat",      "penelitian", "survei",    "regulasi",   "peraturan",  "undang",      "sidang",
    "putusan",    "pengadilan",  "audit",      "transparan", "dokumen",   "terverifikasi", "pejabat",  "juru",
    "bicara",     "konferensi",  "pers",       "lembaga",   "akademisi",  "ilmiah"};

const std::vector<std::string> kFakeKeywords = {
    "viral",      "heboh",       "sebarkan",   "konspirasi", "mengejutkan", "gempar",    "rahasia",    "terbongkar",
    "disembunyikan", "azab",     "mukjizat",   "ajaib",      "dahsyat",     "bohong",    "provokasi",  "fitnah",
    "hasut",      "dajjal",      "bahaya",     "waspadai",   "segera",      "bagikan",   "grup",       "pesan",
    "berantai",   "kabar",       "burung",     "tersembunyi", "menggemparkan", "ngeri"};

const std::vector<std::string> kStopwords = {"dan", "yang", "di", "ke", "dari", "ini", "itu", "dengan",
                                             "untuk", "pada", "akan", "tidak", "juga", "sudah", "ada"};

constexpr double kKeywordRate = 0.10;
constexpr double kStopwordRate = 0.15;

std::string pick(const std::vector<std::string>& words, Rng& rng) {
  return words[rng.uniform_int(words.size())];
}

std::string word(Label label, Rng& rng) {
  const double u = rng.uniform();
  if (u < kKeywordRate) return pick(label == Label::fake ? kFakeKeywords : kValidKeywords, rng);
  if (u < kKeywordRate + kStopwordRate) return pick(kStopwords, rng);
  return pick(kNeutral, rng);
}

std::string sentence(Label label, std::size_t min_words, std::size_t max_words, Rng& rng) {
  const std::size_t n = min_words + rng.uniform_int(max_words - min_words + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string w = word(label, rng);
    if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (i) out.push_back(' ');
    out += w;
  }
  return out;
}

hoaxdet::RawArticle article(Label label, hoaxdet::Source source, Rng& rng) {
  hoaxdet::RawArticle a;
  a.label = label;
  a.source = source;
  a.headline = sentence(label, 5, 9, rng);
  const std::size_t sentences = 3 + rng.uniform_int(3);
  for (std::size_t s = 0; s < sentences; ++s) {
    if (s) a.body.push_back(' ');
    a.body += sentence(label, 6, 12, rng);
    a.body += rng.bernoulli(0.1) ? "!" : ".";
  }
  return a;
}

// Draws `valid + fake` articles in a seeded interleaved order, skipping exact
// repeats so that merging never drops anything.
std::vector<hoaxdet::RawArticle> generate(std::size_t valid, std::size_t fake, hoaxdet::Source source, Rng& rng,
                                          std::set<std::uint64_t>& seen) {
  std::vector<Label> labels(valid, Label::valid);
  labels.insert(labels.end(), fake, Label::fake);
  rng.shuffle(std::span<Label>(labels));
  std::vector<hoaxdet::RawArticle> out;
  for (const auto label : labels) {
    while (true) {
      auto a = article(label, source, rng);
      if (seen.insert(hoaxdet::ingest::content_hash(a)).second) {
        out.push_back(std::move(a));
        break;
      }
    }
  }
  return out;
}

struct Layout {
  std::string file;
  std::vector<std::string> header;  // label, headline, body column names in that order
  std::string valid_spelling;
  std::string fake_spelling;
};

void write_source(const std::filesystem::path& dir, const Layout& layout,
                  const std::vector<hoaxdet::RawArticle>& articles) {
  hoaxdet::ingest::CsvTable table;
  table.header = {"id", layout.header[1], layout.header[2], layout.header[0]};
  std::size_t id = 1;
  for (const auto& a : articles) {
    table.rows.push_back({std::to_string(id++), a.headline, a.body,
                          a.label == Label::fake ? layout.fake_spelling : layout.valid_spelling});
  }
  hoaxdet::harness::write_file_atomic(dir / (layout.file + ".csv"), hoaxdet::ingest::format_csv(table));
  const nlohmann::json mapping = {
      {"label_column", layout.header[0]},
      {"headline_column", layout.header[1]},
      {"body_column", layout.header[2]},
      {"labels", {{layout.valid_spelling, "valid"}, {layout.fake_spelling, "fake"}}}};
  hoaxdet::harness::write_json_atomic(dir / (layout.file + ".mapping.json"), mapping);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the bundled synthetic datasets"};
  std::string out_dir = HOAXDET_DATA_DIR;
  std::uint64_t seed = 20210401;
  app.add_option("--out-dir", out_dir, "Data directory")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path root(out_dir);
  Rng rng(seed);
  std::set<std::uint64_t> seen;

  const auto corpus = generate(1000, 1000, hoaxdet::Source::github, rng, seen);
  hoaxdet::ingest::write_corpus(root / "synthetic" / "corpus.csv", corpus);

  const std::vector<std::pair<Layout, std::pair<std::size_t, std::size_t>>> sources = {
      {{"mendeley", {"tagging", "judul", "narasi"}, "Valid", "Hoax"}, {372, 228}},
      {{"github", {"label", "title", "content"}, "0", "1"}, {250, 250}},
      {{"turnbackhoax", {"kategori", "headline", "body"}, "benar", "hoaks"}, {433, 683}},
  };
  for (const auto& [layout, counts] : sources) {
    const auto source = *hoaxdet::parse_source(layout.file);
    write_source(root / "sources", layout, generate(counts.first, counts.second, source, rng, seen));
  }
  std::cout << "wrote " << corpus.size() << " synthetic documents and three source files under " << root << '\n';
  return 0;
}
