#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "mvsearch/code_model/analysis.h"
#include "mvsearch/code_model/method_ast.h"
#include "mvsearch/common/errors.h"
#include "mvsearch/common/rng.h"
#include "test_util.h"

namespace cm = mvsearch::code_model;
using mvsearch::testing::DataFile;

namespace {

std::set<std::string> Names(const cm::MethodAst& ast, const std::set<cm::BindingId>& ids) {
  std::set<std::string> out;
  for (auto id : ids) out.insert(ast.bindings[id].original_name);
  return out;
}

const cm::StatementNode* FindStatement(const cm::MethodAst& ast,
                                       const cm::StatementNode& node,
                                       const std::string& starts_with) {
  std::string text = ast.source.substr(node.span.begin, node.span.size());
  if (node.kind != cm::StatementKind::kBlock && text.rfind(starts_with, 0) == 0) {
    return &node;
  }
  for (const auto& c : node.children) {
    if (auto* found = FindStatement(ast, c, starts_with)) return found;
  }
  return nullptr;
}

std::string Text(const cm::MethodAst& ast, const cm::StatementNode& s) {
  return ast.source.substr(s.span.begin, s.span.size());
}

}  // namespace

TEST_CASE("tokenize: return statement") {
  auto toks = cm::TokenizeSource("return x;");
  REQUIRE(toks.size() == 4);
  CHECK(toks[0].Is(cm::TokenKind::kKeyword, "return"));
  CHECK(toks[1].kind == cm::TokenKind::kWhitespace);
  CHECK(toks[2].Is(cm::TokenKind::kIdentifier, "x"));
  CHECK(toks[3].Is(cm::TokenKind::kPunctuation, ";"));
}

TEST_CASE("tokenize: empty input") { CHECK(cm::TokenizeSource("").empty()); }

TEST_CASE("tokenize: entity snippet identifiers") {
  const std::string src = DataFile("entities_before.java");
  auto toks = cm::TokenizeSource(src);
  std::set<std::string> idents;
  for (const auto& t : toks) {
    if (t.kind == cm::TokenKind::kIdentifier) idents.insert(t.text);
  }
  CHECK(idents.count("content"));
  CHECK(idents.count("map"));
  CHECK(idents.count("entry"));
  CHECK(cm::JoinTokens(toks) == src);
}

TEST_CASE("tokenize: comments, literals and operators") {
  auto toks = cm::TokenizeSource("a >>>= 0x1F+1e-3; // c\n/* b */ s = \"q\\\"x\" + 'c';");
  std::vector<std::string> sig;
  for (const auto& t : toks) {
    if (!t.IsTrivia()) sig.push_back(t.text);
  }
  CHECK(sig == std::vector<std::string>{"a", ">>>=", "0x1F", "+", "1e-3", ";", "s", "=",
                                        "\"q\\\"x\"", "+", "'c'", ";"});
  int comments = 0;
  for (const auto& t : toks) comments += t.kind == cm::TokenKind::kComment;
  CHECK(comments == 2);
}

TEST_CASE("tokenize: unterminated constructs report their offset") {
  try {
    cm::TokenizeSource("int a = \"abc;");
    FAIL("expected LexError");
  } catch (const mvsearch::LexError& e) {
    CHECK(e.offset() == 8);
  }
  CHECK_THROWS_AS(cm::TokenizeSource("x /* never closed"), mvsearch::LexError);
  CHECK_THROWS_AS(cm::TokenizeSource("char c = 'a"), mvsearch::LexError);
}

TEST_CASE("tokenize: lossless on random fragment soup") {
  const std::vector<std::string> pieces = {
      "int", " ", "\t", "\n", "x", "_y1", "$z", "(", ")", "{", "}", "[", "]",
      ";", ",", ".", "...", "::", "->", ">>>=", "<<", "++", "--", "+", "-",
      "=", "==", "!", "?", ":", "@", "\"s\"", "'c'", "42", "3.5e+2f", "0xFFL",
      "// line\n", "/* block */", "#", "`", "\xc3\xa9"};
  mvsearch::Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::string src;
    const std::size_t n = rng.UniformIndex(40);
    for (std::size_t i = 0; i < n; ++i) src += pieces[rng.UniformIndex(pieces.size())];
    auto toks = cm::TokenizeSource(src);
    REQUIRE(cm::JoinTokens(toks) == src);
    std::size_t pos = 0;
    for (const auto& t : toks) {
      CHECK(t.span.begin == pos);
      CHECK(t.span.size() == t.text.size());
      pos = t.span.end;
    }
  }
}

TEST_CASE("parse: entity snippet bindings and shape") {
  auto ast = cm::ParseMethodSource(DataFile("entities_before.java"));
  CHECK(ast.signature.name == "replaceHtmlEntities");
  std::map<std::string, cm::BindingKind> kinds;
  for (const auto& b : ast.bindings) kinds[b.original_name] = b.kind;
  CHECK(kinds == std::map<std::string, cm::BindingKind>{
                     {"content", cm::BindingKind::kParameter},
                     {"map", cm::BindingKind::kParameter},
                     {"entry", cm::BindingKind::kLoopVariable}});
  REQUIRE(ast.body.children.size() == 2);
  const auto& loop = ast.body.children[0];
  CHECK(loop.kind == cm::StatementKind::kFor);
  REQUIRE(loop.children.size() == 1);
  REQUIRE(loop.children[0].kind == cm::StatementKind::kBlock);
  REQUIRE(loop.children[0].children.size() == 1);
  CHECK(loop.children[0].children[0].kind == cm::StatementKind::kIf);
  CHECK(ast.body.children[1].kind == cm::StatementKind::kReturn);
  // `escapeStrings` is a field and stays unbound.
  for (const auto& b : ast.bindings) CHECK(b.original_name != "escapeStrings");
}

TEST_CASE("parse: empty body") {
  auto ast = cm::ParseMethodSource("void f() { }");
  CHECK(ast.bindings.empty());
  CHECK(ast.body.children.empty());
  CHECK(ast.body.kind == cm::StatementKind::kBlock);
}

TEST_CASE("parse: cipher snippet outermost basic block") {
  auto ast = cm::ParseMethodSource(DataFile("cipher_before.java"));
  auto blocks = cm::BasicBlocks(ast);
  bool found = false;
  for (const auto& bb : blocks) {
    if (bb.statements.size() != 6) continue;
    found = Text(ast, *bb.statements.front()).rfind("cipher = Cipher.getInstance", 0) == 0 &&
            Text(ast, *bb.statements.back()) == "clearPlain();";
  }
  CHECK(found);
}

TEST_CASE("parse: errors") {
  CHECK_THROWS_AS(cm::ParseMethodSource("void f() { if (x { }"), mvsearch::ParseError);
  CHECK_THROWS_AS(cm::ParseMethodSource("void f() { x = 1; "), mvsearch::ParseError);
  CHECK_THROWS_AS(cm::ParseMethodSource("class A { void f() {} }"), mvsearch::ParseError);
  CHECK_THROWS_AS(cm::ParseMethodSource("void f();"), mvsearch::ParseError);
  CHECK_THROWS_AS(cm::ParseMethodSource("void f() { x = 1 }"), mvsearch::ParseError);
  try {
    cm::ParseMethodSource("void f() { g(; }");
    FAIL("expected ParseError");
  } catch (const mvsearch::ParseError& e) {
    CHECK(e.offset() > 0);
  }
}

TEST_CASE("parse: shadowing and sequential scopes create distinct bindings") {
  auto ast = cm::ParseMethodSource(
      "void f(int n) { for (int i = 0; i < n; i++) { g(i); } "
      "for (int i = n; i > 0; i--) h(i); int i = 3; }");
  int is = 0;
  for (const auto& b : ast.bindings) is += b.original_name == "i";
  CHECK(is == 3);
  for (const auto& b : ast.bindings) {
    if (b.original_name == "i") CHECK(b.occurrences.size() >= 1);
  }
  CHECK(ast.bindings[1].occurrences.size() == 4);  // decl, cond, update, call
}

TEST_CASE("parse: fields, types and method names are never bindings") {
  auto ast = cm::ParseMethodSource(
      "Foo(int size, String name) { this.size = size; this.name = name(size); "
      "List<String> list = new ArrayList<>(); list.add(name); }");
  std::set<std::string> names;
  for (const auto& b : ast.bindings) names.insert(b.original_name);
  CHECK(names == std::set<std::string>{"size", "name", "list"});
  for (const auto& b : ast.bindings) {
    if (b.original_name == "size") CHECK(b.occurrences.size() == 3);
    if (b.original_name == "name") CHECK(b.occurrences.size() == 2);
  }
}

TEST_CASE("parse: constructs beyond the basics") {
  const char* src = R"(
    @Override
    public <T extends Comparable<T>> List<Map<String, List<T>>> f(final int[] xs, String... rest) throws IOException {
      int a = 0, b[] = {1, 2}, c = g(a, b.length);
      label:
      while (a < 10) { a += 2; if (a == 5) continue label; else break; }
      do { a--; } while (a > 0);
      switch (a) {
        case 1: b[0] = a; c++; break;
        case 2: { int d = a; }
        default: a = 0;
      }
      try (InputStream in = open(); Reader r = wrap(in)) {
        r.read();
      } catch (IOException | RuntimeException e) {
        log(e);
      } finally {
        close();
      }
      Runnable run = () -> { int z = a; };
      class Local { int q; }
      synchronized (this) { a = 1; }
      Object o = new Object() { public String toString() { return "x"; } };
      assert a > 0 : "bad";
      return null;
    })";
  auto ast = cm::ParseMethodSource(src);
  CHECK(cm::PrintMethod(ast) == src);
  std::map<std::string, cm::BindingKind> kinds;
  for (const auto& b : ast.bindings) kinds[b.original_name] = b.kind;
  for (const char* n : {"xs", "rest", "a", "b", "c", "d", "in", "r", "e", "run", "o"}) {
    CHECK_MESSAGE(kinds.count(n), n);
  }
  CHECK(kinds["xs"] == cm::BindingKind::kParameter);
  CHECK(kinds["e"] == cm::BindingKind::kLocal);
  CHECK(!kinds.count("z"));  // lambda bodies are opaque
  CHECK(!kinds.count("q"));
}

TEST_CASE("def_use: declarations, assignments and calls") {
  auto ast = cm::ParseMethodSource(
      "void f(int a, Obj r) { int b = a; b += a; a++; r.m(a); int[] arr = new int[3]; "
      "arr[b] = 1; --b; c = b; }");
  const auto& s = ast.body.children;
  auto du = [&](std::size_t i) { return cm::ComputeDefUse(s[i], ast); };
  using Set = std::set<std::string>;
  CHECK(Names(ast, du(0).defs) == Set{"b"});
  CHECK(Names(ast, du(0).uses) == Set{"a"});
  CHECK(Names(ast, du(1).defs) == Set{"b"});
  CHECK(Names(ast, du(1).uses) == Set{"a", "b"});
  CHECK(Names(ast, du(2).defs) == Set{"a"});
  CHECK(Names(ast, du(2).uses) == Set{"a"});
  CHECK(Names(ast, du(3).defs).empty());
  CHECK(Names(ast, du(3).uses) == Set{"a", "r"});
  CHECK(Names(ast, du(5).defs) == Set{"arr"});
  CHECK(Names(ast, du(5).uses) == Set{"arr", "b"});
  CHECK(Names(ast, du(6).defs) == Set{"b"});
  // `c` is not a local: invisible to locals, recorded as an unbound write.
  CHECK(Names(ast, du(7).defs).empty());
  CHECK(Names(ast, du(7).uses) == Set{"b"});
  CHECK(du(7).unbound_defs == Set{"c"});
  CHECK(du(0) == du(0));
}

TEST_CASE("def_use: cipher snippet statements") {
  auto ast = cm::ParseMethodSource(DataFile("cipher_before.java"));
  // Oracle: the only local declared in the method is `params`.
  REQUIRE(ast.bindings.size() == 1);
  CHECK(ast.bindings[0].original_name == "params");
  auto* init = FindStatement(ast, ast.body, "cipher.init(");
  auto* params = FindStatement(ast, ast.body, "AlgorithmParameters params");
  REQUIRE(init);
  REQUIRE(params);
  auto du_init = cm::ComputeDefUse(*init, ast);
  CHECK(du_init.defs.empty());
  CHECK(du_init.uses.empty());
  CHECK(du_init.unbound_receivers == std::set<std::string>{"cipher"});
  auto du_params = cm::ComputeDefUse(*params, ast);
  CHECK(Names(ast, du_params.defs) == std::set<std::string>{"params"});
  CHECK(du_params.uses.empty());
}

TEST_CASE("basic_blocks: straight line and control splits") {
  {
    auto ast = cm::ParseMethodSource("void f() { a(); b(); c(); }");
    auto blocks = cm::BasicBlocks(ast);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].statements.size() == 3);
  }
  {
    auto ast = cm::ParseMethodSource("void f(boolean c) { s1(); if (c) { s2(); } s3(); }");
    auto blocks = cm::BasicBlocks(ast);
    std::vector<std::string> texts;
    for (const auto& bb : blocks) {
      REQUIRE(bb.statements.size() == 1);
      texts.push_back(Text(ast, *bb.statements[0]));
    }
    std::sort(texts.begin(), texts.end());
    CHECK(texts == std::vector<std::string>{"s1();", "s2();", "s3();"});
  }
  {
    auto ast = cm::ParseMethodSource(DataFile("entities_before.java"));
    auto blocks = cm::BasicBlocks(ast);
    REQUIRE(blocks.size() == 1);
    REQUIRE(blocks[0].statements.size() == 1);
    CHECK(Text(ast, *blocks[0].statements[0]).rfind("content = content.replace", 0) == 0);
  }
  {
    auto ast = cm::ParseMethodSource(
        "void f(int x) { switch (x) { case 1: a(); b(); case 2: c(); } }");
    auto blocks = cm::BasicBlocks(ast);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].statements.size() == 2);
    CHECK(blocks[1].statements.size() == 1);
  }
}

TEST_CASE("round trip and binding soundness on the worked snippets") {
  for (const char* f : {"entities_before.java", "entities_after.java", "cipher_before.java",
                        "cipher_after.java", "field_label.java"}) {
    const std::string src = DataFile(f);
    auto ast = cm::ParseMethodSource(src);
    CHECK(cm::PrintMethod(ast) == src);
    auto again = cm::ParseMethodSource(cm::PrintMethod(ast));
    CHECK(cm::StructurallyEqual(ast, again));
    for (const auto& b : ast.bindings) {
      REQUIRE(!b.occurrences.empty());
      CHECK(b.occurrences.front() == b.declaration_site);
      for (std::size_t i = 0; i < b.occurrences.size(); ++i) {
        const auto& tok = ast.tokens[b.occurrence_tokens[i]];
        CHECK(tok.kind == cm::TokenKind::kIdentifier);
        CHECK(tok.text == b.original_name);
        CHECK(tok.span == b.occurrences[i]);
      }
    }
  }
}

TEST_CASE("child spans nest inside their parents") {
  auto ast = cm::ParseMethodSource(DataFile("field_label.java"));
  std::function<void(const cm::StatementNode&)> walk = [&](const cm::StatementNode& n) {
    for (const auto& c : n.children) {
      CHECK(n.span.Contains(c.span));
      CHECK(!(n.span == c.span));
      walk(c);
    }
  };
  walk(ast.body);
  std::set<std::string> names;
  for (const auto& b : ast.bindings) names.insert(b.original_name);
  CHECK(names == std::set<std::string>{"namespace", "fieldName", "bundle", "label", "mre"});
}
