#include "mvsearch/corpus/synth.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <string_view>
#include <vector>

namespace mvsearch::corpus {

namespace {

template <typename T, std::size_t N>
const T& Pick(Rng& rng, const std::array<T, N>& items) {
  return items[rng.UniformIndex(N)];
}

// k distinct indices out of [0, n), in draw order.
std::vector<std::size_t> Distinct(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.UniformIndex(n - i)]);
  all.resize(k);
  return all;
}

std::string Id(std::string_view family, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return std::string(family) + "-" + buf;
}

constexpr std::array<std::string_view, 8> kMethodNames = {
    "process", "handle", "execute", "apply", "perform", "run", "step", "invoke"};

// Words mixed into every family's queries so no family is recognisable
// from its query template alone.
constexpr std::array<std::string_view, 6> kQueryLeads = {
    "helper to", "routine that will", "method to", "code that will", "utility to", "logic to"};

// --- structure family -----------------------------------------------------

struct Idiom {
  std::string_view phrase;
  std::string_view code;
};

// Every idiom reads and writes only the stock locals declared by
// StructureEntry: n, step, items, item, acc, tmp, flag.
constexpr std::array<Idiom, 13> kIdioms = {{
    {"loop until exhausted", "while (tmp > 0) {\n    tmp = tmp - step;\n  }"},
    {"iterate over a counted range",
     "for (int i = 0; i < n; i++) {\n    acc += i;\n  }"},
    {"repeat at least once", "do {\n    tmp = tmp / 2;\n  } while (tmp > 1);"},
    {"dispatch on the case code",
     "switch (n) {\n    case 0:\n      acc = 1;\n      break;\n    case 1:\n      acc = 2;\n"
     "      break;\n    default:\n      acc = 0;\n  }"},
    {"recover from failure",
     "try {\n    acc = acc / step;\n  } catch (ArithmeticFault e) {\n    acc = -1;\n  }"},
    {"guard with a monitor", "synchronized (item) {\n    acc++;\n  }"},
    {"reject invalid input", "if (n < 0) {\n    throw new BadInputFault();\n  }"},
    {"choose the smaller one", "acc = n < step ? n : step;"},
    {"shift bits left", "acc = acc << 2;"},
    {"skip zero elements",
     "for (int x : items) {\n    if (x == 0) continue;\n    acc += x;\n  }"},
    {"check the runtime type", "if (item instanceof Widget) {\n    flag = true;\n  }"},
    {"bail out early when empty", "if (n == 0) {\n    return acc;\n  }"},
    {"stop at the first match",
     "for (int x : items) {\n    if (x == n) {\n      acc = x;\n      break;\n    }\n  }"},
}};

constexpr std::array<std::string_view, 5> kStructureFillers = {
    "tmp = tmp + n;", "acc = acc + 1;", "flag = acc > tmp;", "acc = acc * step;",
    "tmp = step - 1;"};

CorpusEntry StructureEntry(Rng& rng, std::size_t i) {
  const auto cues = Distinct(rng, kIdioms.size(), 2);
  std::string code = "int " + std::string(Pick(rng, kMethodNames)) +
                     "(int n, int step, int[] items, Object item) {\n"
                     "  int acc = 0;\n  int tmp = n;\n  boolean flag = false;\n";
  auto filler = [&] {
    if (rng.UniformIndex(2)) code += "  " + std::string(Pick(rng, kStructureFillers)) + "\n";
  };
  filler();
  code += "  " + std::string(kIdioms[cues[0]].code) + "\n";
  filler();
  code += "  " + std::string(kIdioms[cues[1]].code) + "\n";
  code += "  return flag ? tmp : acc;\n}\n";
  std::string query = std::string(Pick(rng, kQueryLeads)) + " " +
                      std::string(kIdioms[cues[0]].phrase) + " and " +
                      std::string(kIdioms[cues[1]].phrase);
  return {Id("structure", i), code, query};
}

// --- variable family ------------------------------------------------------

constexpr std::array<std::string_view, 40> kNouns = {
    "widget",  "invoice",  "customer", "ticket",   "ledger",  "parcel",    "sensor",
    "voltage", "budget",   "salary",   "tariff",   "coupon",  "reward",    "quota",
    "meter",   "bucket",   "pixel",    "vertex",   "segment", "packet",    "route",
    "station", "engine",   "fleet",    "cargo",    "harvest", "garden",    "recipe",
    "battery", "turbine",  "signal",   "latency",  "margin",  "altitude",  "rainfall",
    "mileage", "discount", "pension",  "donation", "inventory"};

constexpr std::array<std::string_view, 8> kSuffixes = {"Total", "Limit", "Amount", "Level",
                                                       "Rate",  "Delta", "Score",  "Weight"};

constexpr std::array<std::string_view, 5> kVariableVerbs = {"update", "combine", "adjust",
                                                            "rescale", "reconcile"};

CorpusEntry VariableEntry(Rng& rng, std::size_t i) {
  // Two cue nouns plus a decoy that is not mentioned in the query.
  const auto nouns = Distinct(rng, kNouns.size(), 3);
  std::string v[3];
  for (int k = 0; k < 3; ++k) {
    v[k] = std::string(kNouns[nouns[k]]) + std::string(Pick(rng, kSuffixes));
  }
  std::vector<std::string> body = {
      "double acc = " + v[0] + " * 2;",
      "int step = " + v[1] + " + 1;",
      "double " + v[2] + " = 0.5;",
  };
  rng.Shuffle(body);
  body.push_back(v[0] + " = " + v[0] + " - step;");
  body.push_back(v[2] + " = " + v[2] + " + " + v[1] + ";");
  if (rng.UniformIndex(2)) body.push_back("acc += " + v[2] + ";");
  body.push_back("if (acc > " + v[0] + ") {\n    acc = " + v[0] + ";\n  }");
  std::string code = "double " + std::string(Pick(rng, kMethodNames)) + "(double " + v[0] +
                     ", int " + v[1] + ") {\n";
  for (const auto& s : body) code += "  " + s + "\n";
  code += "  return acc;\n}\n";
  std::string query = std::string(Pick(rng, kQueryLeads)) + " " +
                      std::string(Pick(rng, kVariableVerbs)) + " the " +
                      std::string(kNouns[nouns[0]]) + " and the " +
                      std::string(kNouns[nouns[1]]);
  return {Id("variable", i), code, query};
}

// --- api family -----------------------------------------------------------

struct ApiUse {
  std::string_view phrase;
  std::string_view code;  // "$" stands for a fresh local name
};

// Parameters available to every snippet: String name, byte[] data,
// List<Integer> values, int size, OutputStream out.
constexpr std::array<ApiUse, 24> kApiUses = {{
    {"encrypt the payload", "Cipher $ = Cipher.getInstance(\"AES\");"},
    {"compute a hash digest", "MessageDigest $ = MessageDigest.getInstance(\"SHA-256\");"},
    {"encode as base64", "String $ = Base64.getEncoder().encodeToString(data);"},
    {"read lines from disk", "List<String> $ = Files.readAllLines(Paths.get(name));"},
    {"match a regular expression", "Pattern $ = Pattern.compile(\"[a-z]+\");"},
    {"pause the current thread", "Thread.sleep(size);"},
    {"record the current instant", "Instant $ = Instant.now();"},
    {"generate a unique identifier", "UUID $ = UUID.randomUUID();"},
    {"exact decimal arithmetic", "BigDecimal $ = new BigDecimal(name);"},
    {"build a lookup table", "Map<String, Integer> $ = new HashMap<>();"},
    {"collect into a growable list", "List<Integer> $ = new ArrayList<>();"},
    {"sort the elements", "Collections.sort(values);"},
    {"take the square root", "double $ = Math.sqrt(size);"},
    {"parse digits into a number", "int $ = Integer.parseInt(name);"},
    {"concatenate text pieces", "StringBuilder $ = new StringBuilder();"},
    {"open a network connection", "Socket $ = new Socket(name, 80);"},
    {"resolve a web address", "URL $ = new URL(name);"},
    {"get the calendar date", "LocalDate $ = LocalDate.now();"},
    {"require a non null argument", "Objects.requireNonNull(name);"},
    {"measure elapsed milliseconds", "long $ = System.currentTimeMillis();"},
    {"draw a pseudorandom number", "Random $ = new Random(size);"},
    {"compress the output stream", "GZIPOutputStream $ = new GZIPOutputStream(out);"},
    {"sign the message", "Signature $ = Signature.getInstance(\"SHA256withRSA\");"},
    {"format a timestamp", "SimpleDateFormat $ = new SimpleDateFormat(\"yyyy-MM-dd\");"},
}};

constexpr std::array<std::string_view, 4> kApiFillers = {
    "int acc = size + 1;", "size = size * 2;", "boolean flag = size > 0;", "int tmp = size - 1;"};

std::string Fill(std::string_view tmpl, const std::string& name) {
  std::string out;
  for (char c : tmpl) {
    if (c == '$') {
      out += name;
    } else {
      out += c;
    }
  }
  return out;
}

CorpusEntry ApiEntry(Rng& rng, std::size_t i) {
  const auto cues = Distinct(rng, kApiUses.size(), 2);
  std::string code = "void " + std::string(Pick(rng, kMethodNames)) +
                     "(String name, byte[] data, List<Integer> values, int size, "
                     "OutputStream out) throws Exception {\n";
  std::vector<std::string> body = {Fill(kApiUses[cues[0]].code, "res"),
                                   Fill(kApiUses[cues[1]].code, "aux")};
  const auto fill = Distinct(rng, kApiFillers.size(), rng.UniformIndex(3));
  for (std::size_t f : fill) body.push_back(std::string(kApiFillers[f]));
  rng.Shuffle(body);
  for (const auto& s : body) code += "  " + s + "\n";
  code += "}\n";
  std::string query = std::string(Pick(rng, kQueryLeads)) + " " +
                      std::string(kApiUses[cues[0]].phrase) + " and " +
                      std::string(kApiUses[cues[1]].phrase);
  return {Id("api", i), code, query};
}

// --- random methods -------------------------------------------------------

constexpr std::array<std::string_view, 14> kLocalNames = {
    "a",     "b",     "i",     "count", "total",   "index", "value",
    "tmp",   "buf",   "var1",  "var10", "userId",  "max_len", "x2"};

class MethodWriter {
 public:
  explicit MethodWriter(Rng& rng) : rng_(rng) {}

  std::string Write() {
    out_ = "static int m" + std::to_string(rng_.UniformIndex(1000)) + "(";
    scopes_.emplace_back();
    const std::size_t params = rng_.UniformIndex(4);
    for (std::size_t k = 0; k < params; ++k) {
      const std::string name = FreshName();
      if (k) out_ += ", ";
      out_ += "int " + name;
      scopes_.back().push_back(name);
    }
    out_ += ") {\n";
    const std::size_t n = 1 + rng_.UniformIndex(9);
    for (std::size_t k = 0; k < n; ++k) Statement(1, 0);
    Indent(1);
    out_ += "return " + Expr() + ";\n}\n";
    return out_;
  }

 private:
  void Indent(int depth) { out_.append(static_cast<std::size_t>(2 * depth), ' '); }

  std::vector<std::string> Visible() const {
    std::vector<std::string> v;
    for (const auto& s : scopes_) v.insert(v.end(), s.begin(), s.end());
    return v;
  }

  // A name not visible in any enclosing scope (Java forbids shadowing a
  // local); sibling scopes may reuse names.
  std::string FreshName() {
    const auto visible = Visible();
    for (int tries = 0; tries < 32; ++tries) {
      std::string name(kLocalNames[rng_.UniformIndex(kLocalNames.size())]);
      if (std::find(visible.begin(), visible.end(), name) == visible.end()) return name;
    }
    std::string name;
    do {
      name = "v" + std::to_string(counter_++);
    } while (std::find(visible.begin(), visible.end(), name) != visible.end());
    return name;
  }

  std::string Var() {
    const auto visible = Visible();
    if (visible.empty()) return std::to_string(rng_.UniformIndex(10));
    return visible[rng_.UniformIndex(visible.size())];
  }

  std::string Atom() {
    switch (rng_.UniformIndex(6)) {
      case 0: return std::to_string(rng_.UniformIndex(100));
      case 1: return "field" + std::to_string(rng_.UniformIndex(3));
      case 2: return "helper(" + Var() + ")";
      default: return Var();
    }
  }

  std::string Expr() {
    static constexpr std::array<std::string_view, 6> kOps = {"+", "-", "*", "%", "&", "^"};
    switch (rng_.UniformIndex(5)) {
      case 0: return Atom();
      case 1: return Var() + " > " + Atom() + " ? " + Atom() + " : " + Atom();
      case 2: return "(" + Atom() + " " + std::string(Pick(rng_, kOps)) + " " + Atom() + ")";
      default: return Atom() + " " + std::string(Pick(rng_, kOps)) + " " + Atom();
    }
  }

  void Block(int depth, int nest, bool own_scope = true) {
    if (own_scope) scopes_.emplace_back();
    const std::size_t n = 1 + rng_.UniformIndex(3);
    for (std::size_t k = 0; k < n; ++k) Statement(depth, nest + 1);
    if (own_scope) scopes_.pop_back();
  }

  void Statement(int depth, int nest) {
    const std::size_t kinds = nest >= 2 ? 7 : 13;
    Indent(depth);
    switch (rng_.UniformIndex(kinds)) {
      case 0:
      case 1: {
        const std::string name = FreshName();
        out_ += "int " + name + " = " + Expr();
        if (rng_.UniformIndex(4) == 0) {
          const std::string second = FreshName();
          if (second != name) {
            out_ += ", " + second + " = " + Expr();
            scopes_.back().push_back(second);
          }
        }
        out_ += ";\n";
        scopes_.back().push_back(name);
        return;
      }
      case 2: out_ += Var() + " = " + Expr() + ";\n"; return;
      case 3: out_ += Var() + " += " + Atom() + ";\n"; return;
      case 4: out_ += Var() + (rng_.UniformIndex(2) ? "++;\n" : "--;\n"); return;
      case 5: out_ += "sink.accept(" + Var() + ", " + Atom() + ");\n"; return;
      case 6:
        out_ += "// note " + std::to_string(rng_.UniformIndex(50)) + "\n";
        Indent(depth);
        out_ += "log(\"v=\" + " + Var() + ");\n";
        return;
      case 7:
        out_ += "if (" + Var() + " > " + Atom() + ") {\n";
        Block(depth + 1, nest);
        Indent(depth);
        if (rng_.UniformIndex(2)) {
          out_ += "} else {\n";
          Block(depth + 1, nest);
          Indent(depth);
        }
        out_ += "}\n";
        return;
      case 8: {
        scopes_.emplace_back();
        const std::string k = FreshName();
        out_ += "for (int " + k + " = 0; " + k + " < " + Atom() + "; " + k + "++) {\n";
        scopes_.back().push_back(k);
        Block(depth + 1, nest, /*own_scope=*/false);
        scopes_.pop_back();
        Indent(depth);
        out_ += "}\n";
        return;
      }
      case 9: {
        scopes_.emplace_back();
        const std::string e = FreshName();
        out_ += "for (int " + e + " : table) {\n";
        scopes_.back().push_back(e);
        Block(depth + 1, nest, /*own_scope=*/false);
        scopes_.pop_back();
        Indent(depth);
        out_ += "}\n";
        return;
      }
      case 10:
        out_ += "while (" + Var() + " < " + Atom() + ") {\n";
        Block(depth + 1, nest);
        Indent(depth + 1);
        out_ += "break;\n";
        Indent(depth);
        out_ += "}\n";
        return;
      case 11:
        out_ += "try {\n";
        Block(depth + 1, nest);
        Indent(depth);
        out_ += "} catch (IllegalStateException ex) {\n";
        Block(depth + 1, nest);
        Indent(depth);
        out_ += "}\n";
        return;
      default:
        out_ += "switch (" + Var() + ") {\n";
        Indent(depth + 1);
        out_ += "case 1:\n";
        scopes_.emplace_back();
        Indent(depth + 2);
        out_ += Var() + " = " + Atom() + ";\n";
        Indent(depth + 2);
        out_ += "break;\n";
        scopes_.pop_back();
        Indent(depth + 1);
        out_ += "default:\n";
        Block(depth + 2, nest);
        Indent(depth);
        out_ += "}\n";
        return;
    }
  }

  Rng& rng_;
  std::string out_;
  std::vector<std::vector<std::string>> scopes_;
  int counter_ = 0;
};

}  // namespace

Corpus PlantedCorpus(std::size_t per_family, std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  for (std::size_t i = 0; i < per_family; ++i) {
    corpus.entries.push_back(StructureEntry(rng, i));
    corpus.entries.push_back(VariableEntry(rng, i));
    corpus.entries.push_back(ApiEntry(rng, i));
  }
  return corpus;
}

std::string RandomMethod(Rng& rng) { return MethodWriter(rng).Write(); }

Corpus RandomMethods(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "random-%04zu", i);
    corpus.entries.push_back({id, RandomMethod(rng), "random method " + std::to_string(i)});
  }
  return corpus;
}

}  // namespace mvsearch::corpus
