"""Regenerate corpus/mappings/level-NN.json from the curated table below."""

import json
import os

P = "android.permission."
PERMISSIONS = {
    P + "ACCESS_FINE_LOCATION": "dangerous",
    P + "ACCESS_COARSE_LOCATION": "dangerous",
    P + "CAMERA": "dangerous",
    P + "RECORD_AUDIO": "dangerous",
    P + "READ_PHONE_STATE": "dangerous",
    P + "READ_PRIVILEGED_PHONE_STATE": "signature",
    P + "WRITE_EXTERNAL_STORAGE": "dangerous",
    P + "READ_EXTERNAL_STORAGE": "dangerous",
    P + "READ_CONTACTS": "dangerous",
    P + "WRITE_CONTACTS": "dangerous",
    P + "SEND_SMS": "dangerous",
    P + "INTERNET": "normal",
}

LOCATION_UPDATES = "android.location.LocationManager.requestLocationUpdates(java.lang.String,long,float,android.location.LocationListener)"
GET_DEVICE_ID = "android.telephony.TelephonyManager.getDeviceId()"
GET_IMEI = "android.telephony.TelephonyManager.getImei()"
NEIGHBORING_CELLS = "android.telephony.TelephonyManager.getNeighboringCellInfo()"
CREATE_GROUP = "android.net.wifi.p2p.WifiP2pManager.createGroup(android.net.wifi.p2p.WifiP2pManager$Channel,android.net.wifi.p2p.WifiP2pManager$ActionListener)"
SCAN_RESULTS = "android.net.wifi.WifiManager.getScanResults()"
CAMERA_OPEN = "android.hardware.Camera.open()"
AUDIO_SOURCE = "android.media.MediaRecorder.setAudioSource(int)"
FILE_DELETE = "java.io.File.delete()"
LIST_FILES = "java.io.File.listFiles()"
APPLY_BATCH = "android.content.ContentResolver.applyBatch(java.lang.String,java.util.ArrayList)"
SEND_TEXT = "android.telephony.SmsManager.sendTextMessage(java.lang.String,java.lang.String,java.lang.String,android.app.PendingIntent,android.app.PendingIntent)"
OPEN_CONNECTION = "java.net.URL.openConnection()"


def anyof(*names):
    return {"mode": "anyOf", "perms": [P + n for n in names]}


def allof(*names):
    return {"mode": "allOf", "perms": [P + n for n in names]}


def level(v):
    apis = {
        LOCATION_UPDATES: anyof("ACCESS_COARSE_LOCATION", "ACCESS_FINE_LOCATION"),
        CAMERA_OPEN: anyof("CAMERA"),
        AUDIO_SOURCE: anyof("RECORD_AUDIO"),
        FILE_DELETE: anyof("WRITE_EXTERNAL_STORAGE"),
        LIST_FILES: anyof("READ_EXTERNAL_STORAGE"),
        APPLY_BATCH: allof("READ_CONTACTS", "WRITE_CONTACTS"),
        SEND_TEXT: anyof("SEND_SMS"),
        OPEN_CONNECTION: anyof("INTERNET"),
    }
    unprotected = []
    apis[GET_DEVICE_ID] = anyof("READ_PHONE_STATE") if v <= 28 else anyof("READ_PRIVILEGED_PHONE_STATE")
    if v >= 26:
        apis[GET_IMEI] = anyof("READ_PHONE_STATE") if v <= 28 else anyof("READ_PRIVILEGED_PHONE_STATE")
    if v <= 28:
        apis[NEIGHBORING_CELLS] = anyof("ACCESS_COARSE_LOCATION")
    if v >= 29:
        apis[CREATE_GROUP] = anyof("ACCESS_FINE_LOCATION")
    else:
        unprotected.append(CREATE_GROUP)
    apis[SCAN_RESULTS] = anyof("ACCESS_COARSE_LOCATION", "ACCESS_FINE_LOCATION") if v <= 28 else anyof("ACCESS_FINE_LOCATION")
    doc = {"level": v, "permissions": PERMISSIONS, "apis": apis}
    if unprotected:
        doc["unprotected"] = unprotected
    return doc


if __name__ == "__main__":
    here = os.path.join(os.path.dirname(os.path.abspath(__file__)), "mappings")
    for v in range(23, 31):
        with open(os.path.join(here, f"level-{v}.json"), "w") as f:
            json.dump(level(v), f, indent=2, sort_keys=True)
            f.write("\n")
