// Protocol fixture: answers every request with its own "nl" text.
//
// Misbehaviour switches for tests:
//   --delay-ms N          sleep before each answer
//   --silent-on WORD      never answer requests whose text contains WORD
//   --error-on WORD       answer with an error instead
//   --late-on WORD        answer only after --late-ms
//   --reverse N           collect N requests, answer them newest first
//   --handshake LINE      replace the handshake line
//   --exit-after N        exit after N requests

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

int main(int argc, char** argv) {
    CLI::App    app{"echo translator plugin"};
    int         delay = 0;
    int         lateMs = 300;
    int         reverse = 0;
    int         exitAfter = -1;
    std::string silent;
    std::string error;
    std::string late;
    std::string handshake = json{{"protocol", 1}, {"name", "echo"}}.dump();
    app.add_option("--delay-ms", delay);
    app.add_option("--late-ms", lateMs);
    app.add_option("--silent-on", silent);
    app.add_option("--error-on", error);
    app.add_option("--late-on", late);
    app.add_option("--reverse", reverse);
    app.add_option("--handshake", handshake);
    app.add_option("--exit-after", exitAfter);
    CLI11_PARSE(app, argc, argv);

    std::cout << handshake << std::endl;

    auto hit = [](const std::string& text, const std::string& word) {
        return !word.empty() && text.find(word) != std::string::npos;
    };
    std::vector<json> held;

    int seen = 0;
    for (std::string line; std::getline(std::cin, line);) {
        json req;
        try {
            req = json::parse(line);
        }
        catch (const json::exception&) {
            continue;
        }
        auto id = req.value("id", json());
        auto nl = req.value("nl", std::string());
        if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));

        json reply{{"id", id}};
        if (hit(nl, error)) reply["error"] = "refused";
        else if (req.value("task", "") == "paraphrase") reply["text"] = nl;
        else reply["cnl"] = nl;

        if (hit(nl, silent)) {
        }
        else if (hit(nl, late)) {
            std::this_thread::sleep_for(std::chrono::milliseconds(lateMs));
            std::cout << reply.dump() << std::endl;
        }
        else if (reverse > 0) {
            held.push_back(reply);
            if (static_cast<int>(held.size()) == reverse) {
                for (auto it = held.rbegin(); it != held.rend(); ++it) std::cout << it->dump() << std::endl;
                held.clear();
            }
        }
        else {
            std::cout << reply.dump() << std::endl;
        }
        if (++seen == exitAfter) return 0;
    }
    for (auto it = held.rbegin(); it != held.rend(); ++it) std::cout << it->dump() << std::endl;
    return 0;
}
