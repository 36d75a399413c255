#pragma once

#include <string>
#include <vector>

namespace cra {

/// Round-trip-exact decimal form of a double (17 significant digits).
std::string fmt17(double v);

/// Minimal deterministic JSON writer: keys keep insertion order, doubles are
/// serialized with fmt17, output is 2-space indented with LF newlines. Small
/// on purpose; parsing stays with the vendored JSON library.
class JsonWriter {
  public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v);
    JsonWriter& value(double v);
    JsonWriter& value(long long v);
    JsonWriter& value(int v);
    JsonWriter& value(bool v);
    JsonWriter& value_null();

    /// Finished document text (with trailing newline).
    std::string str() const;

  private:
    enum class Ctx { Object, Array };
    void prefix();
    void indent();
    std::string out_;
    std::vector<Ctx> stack_;
    std::vector<bool> has_items_;
    bool pending_key_ = false;
};

std::string json_escape(const std::string& s);

}  // namespace cra
