import socket
import threading

from gridarena.protocol import PROTOCOL_VERSION, decode, encode, make_message


class AgentClient:
    """Minimal blocking protocol client for loopback tests."""

    def __init__(self, host, port, entry_name="tester",
                 protocol_version=PROTOCOL_VERSION, timeout=30.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.reader = self.sock.makefile("rb")
        self.score_cp = 0
        self.slot = None
        self.welcome = None
        hello = make_message("hello", {"entry_name": entry_name})
        hello["protocol_version"] = protocol_version
        self.send_raw(encode(hello))
        msg = self.read_message()
        if msg["type"] == "error":
            raise ConnectionError(msg["payload"]["message"])
        assert msg["type"] == "welcome", msg
        self.welcome = msg["payload"]
        self.slot = self.welcome["agent_slot"]

    def send_raw(self, data: bytes):
        self.sock.sendall(data)

    def send(self, msg: dict):
        self.send_raw(encode(msg))

    def read_message(self) -> dict:
        line = self.reader.readline()
        if not line:
            raise ConnectionError("server closed the connection")
        return decode(line)

    def run(self, policy, on_message=None):
        """observation -> action loop; returns (final scores, step rewards)."""
        rewards = []
        while True:
            msg = self.read_message()
            if on_message:
                on_message(msg)
            if msg["type"] == "observation":
                p = msg["payload"]
                action = policy(p["view"])
                if action is not None:
                    self.send(make_message("action", {
                        "match_id": p["match_id"],
                        "tick": p["tick"],
                        "action": action,
                    }))
            elif msg["type"] == "step_result":
                self.score_cp += msg["payload"]["reward"]
                rewards.append(msg["payload"]["reward"])
            elif msg["type"] == "match_end":
                return msg["payload"]["scores"], rewards

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


def run_client_in_thread(host, port, policy, entry_name="tester"):
    """Start a client thread; returns (thread, results dict)."""
    out = {}

    def go():
        try:
            client = AgentClient(host, port, entry_name=entry_name)
            scores, rewards = client.run(policy)
            out["scores"] = scores
            out["rewards"] = rewards
            out["score_cp"] = client.score_cp
            out["slot"] = client.slot
            client.close()
        except Exception as e:   # surfaced by the test via out["error"]
            out["error"] = e

    t = threading.Thread(target=go, daemon=True)
    t.start()
    return t, out
